//! Declarative runs: a TOML config in, a self-describing result envelope out.
//!
//! Config lengths are in nanometres. Output lengths are in micrometres and
//! rates in rad/s; every CSV column name carries its unit and every JSON
//! envelope carries a `units` block.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cmt::{analyze_tight_binding, array_coupling, CouplingMatrix};
use crate::coupling::{effective_length, end_to_end_rate, lateral_rate, mode_volume, rabi_frequency};
use crate::dbr::{build_grating, log_linear_slope, reflectivity_sweep, SweepCurve};
use crate::design::{
    fit_exponential, grating_indices, grating_point, jch_report, lateral_sweep, n_dbr, reference_mode, DesignOptions,
    GratingPoint, DEFAULT_PERIOD_COUNTS, DEFAULT_SEPARATIONS,
};
use crate::geometry::{GridSpec, SlotArraySpec, MIN_PADDING_NM};
use crate::modesolver::{solve_te_modes, SolveRequest};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Modes,
    Couple,
    Nacmt,
    Dbr,
    Modevol,
    Design,
}

impl Command {
    pub const ALL: [Command; 6] = [Self::Modes, Self::Couple, Self::Nacmt, Self::Dbr, Self::Modevol, Self::Design];

    pub fn name(self) -> &'static str {
        match self {
            Self::Modes => "modes",
            Self::Couple => "couple",
            Self::Nacmt => "nacmt",
            Self::Dbr => "dbr",
            Self::Modevol => "modevol",
            Self::Design => "design",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

/// Inclusive arithmetic range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Centre-to-centre guide separations (nm).
    #[serde(default = "default_separations")]
    pub separations: Vec<f64>,
    /// Grating periods (nm).
    #[serde(default = "default_period_range")]
    pub period: Range,
    /// Numbers of grating periods, half-integers allowed.
    #[serde(default = "default_period_counts")]
    pub period_counts: Vec<f64>,
}

fn default_separations() -> Vec<f64> {
    DEFAULT_SEPARATIONS.iter().map(|d| (d * 1e3).round()).collect()
}

fn default_period_range() -> Range {
    Range { start: 200.0, stop: 240.0, step: 1.0 }
}

fn default_period_counts() -> Vec<f64> {
    DEFAULT_PERIOD_COUNTS.to_vec()
}

impl Default for Sweep {
    fn default() -> Self {
        Self { separations: default_separations(), period: default_period_range(), period_counts: default_period_counts() }
    }
}

/// Scalar inputs; which ones matter depends on the command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Modes to solve for (`modes`); defaults to the number of guides.
    pub num_modes: Option<usize>,
    /// Target hopping rate (rad/s) for `design`.
    pub target_j: Option<f64>,
    /// Wavelength (nm) when no structure is given.
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    /// Grating period (nm).
    #[serde(default = "default_period")]
    pub period: f64,
    /// Fraction of the period taken by the solid section.
    #[serde(default = "default_duty")]
    pub duty: f64,
    /// Number of grating periods for single-grating calculations.
    pub periods: Option<f64>,
    /// Cavity length between gratings (nm).
    #[serde(default)]
    pub cavity_length: f64,
    /// Emitter dipole moment (C m).
    #[serde(default = "default_dipole")]
    pub dipole: f64,
    /// Lateral coupling element (rad^2/um^2), bypassing the mode solver.
    pub kappa: Option<f64>,
    /// Effective index paired with `kappa`.
    pub n_eff: Option<f64>,
    /// Section indices, bypassing the mode solver.
    pub n_lo: Option<f64>,
    pub n_hi: Option<f64>,
    /// Explicit mirror: power reflection, grating length (nm) and combined index.
    pub reflectivity: Option<f64>,
    pub grating_length: Option<f64>,
    pub n_dbr: Option<f64>,
    /// Square coupling matrix file for `nacmt`, relative to the config file.
    pub matrix_file: Option<PathBuf>,
    /// Isolated-guide propagation constant (rad/um) for a matrix read from file.
    pub beta_ref: Option<f64>,
}

fn default_wavelength() -> f64 {
    637.0
}

fn default_period() -> f64 {
    220.0
}

fn default_duty() -> f64 {
    0.5
}

fn default_dipole() -> f64 {
    1e-30
}

impl Default for Params {
    fn default() -> Self {
        Self {
            num_modes: None,
            target_j: None,
            wavelength: default_wavelength(),
            period: default_period(),
            duty: default_duty(),
            periods: None,
            cavity_length: 0.0,
            dipole: default_dipole(),
            kappa: None,
            n_eff: None,
            n_lo: None,
            n_hi: None,
            reflectivity: None,
            grating_length: None,
            n_dbr: None,
            matrix_file: None,
            beta_ref: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub structure: Option<SlotArraySpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub params: Params,
    pub output: Option<Output>,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunError {
    #[error("invalid config field `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{stage} failed: {message}")]
    Compute { stage: String, message: String },
}

impl RunError {
    fn schema(field: &str, reason: impl Into<String>) -> Self {
        Self::Schema { field: field.into(), reason: reason.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Io { path: path.display().to_string(), reason: e.to_string() }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> Value {
        json!({ "tool": "slotcav", "version": VERSION, "error": self })
    }
}

macro_rules! compute_error {
    ($($t:ty => $stage:literal),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                Self::Compute { stage: $stage.into(), message: e.to_string() }
            }
        }
    )*};
}

compute_error!(
    crate::error::GeometryError => "geometry",
    crate::error::SolverError => "modesolver",
    crate::error::CmtError => "cmt",
    crate::error::CouplingError => "coupling",
    crate::error::DbrError => "dbr",
    crate::error::DesignError => "design"
);

/// First back-quoted name in a serde message, e.g. "missing field `command`".
fn quoted_field(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(&msg[start..start + len])
}

impl RunConfig {
    /// Parses and validates a config. `base` resolves relative file paths and
    /// `command`, when given, fills in or must agree with the config's command.
    pub fn parse(text: &str, base: Option<&Path>, command: Option<Command>) -> Result<Self, RunError> {
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| RunError::schema("<syntax>", e.message().trim()))?;
        if let Some(cmd) = command {
            match table.get("command").and_then(|v| v.as_str()) {
                Some(c) if c != cmd.name() => {
                    return Err(RunError::schema("command", format!("config requests `{c}` but `{}` was invoked", cmd.name())))
                }
                _ => {
                    table.insert("command".into(), toml::Value::String(cmd.name().into()));
                }
            }
        }
        let mut cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
            let msg = e.message().trim().to_string();
            RunError::schema(quoted_field(&msg).unwrap_or("<root>"), msg.clone())
        })?;
        if let (Some(base), Some(f)) = (base, cfg.params.matrix_file.as_mut()) {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        if let (Some(base), Some(out)) = (base, cfg.output.as_mut()) {
            if out.path.is_relative() {
                out.path = base.join(&out.path);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, command: Option<Command>) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
        Self::parse(&text, path.parent(), command)
    }

    fn structure(&self) -> Result<&SlotArraySpec, RunError> {
        self.structure.as_ref().ok_or_else(|| RunError::schema("structure", format!("required by `{}`", self.command.name())))
    }

    fn wavelength(&self) -> f64 {
        self.structure.as_ref().map_or(self.params.wavelength, |s| s.wavelength)
    }

    fn section_indices(&self) -> Result<(f64, f64), RunError> {
        match (self.params.n_lo, self.params.n_hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            (None, None) => Ok(grating_indices(self.structure()?, &self.grid)?),
            _ => Err(RunError::schema("params.n_lo", "give both n_lo and n_hi or neither")),
        }
    }

    fn explicit_mirror(&self) -> Option<(f64, f64, f64)> {
        let p = &self.params;
        Some((p.reflectivity?, p.grating_length?, p.n_dbr?))
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<(), RunError> {
        if let Some(s) = &self.structure {
            s.validate().map_err(|e| RunError::schema("structure", e.to_string()))?;
        }
        for (name, v) in [("grid.dx", self.grid.dx), ("grid.dy", self.grid.dy), ("grid.padding", self.grid.padding)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RunError::schema(name, "must be positive"));
            }
        }
        if self.grid.padding < MIN_PADDING_NM {
            return Err(RunError::schema("grid.padding", format!("must be at least {MIN_PADDING_NM} nm")));
        }
        let r = self.sweep.period;
        if !(r.step > 0.0 && r.start > 0.0 && r.stop >= r.start) {
            return Err(RunError::schema("sweep.period", "need 0 < start <= stop and step > 0"));
        }
        if self.sweep.separations.iter().any(|d| !(*d > 0.0)) {
            return Err(RunError::schema("sweep.separations", "separations must be positive"));
        }
        let half_int = |n: f64| n >= 0.5 && (2.0 * n - (2.0 * n).round()).abs() < 1e-9;
        if self.sweep.period_counts.is_empty() || !self.sweep.period_counts.iter().all(|n| half_int(*n)) {
            return Err(RunError::schema("sweep.period_counts", "need at least one count, each a positive multiple of 0.5"));
        }
        let p = &self.params;
        if let Some(n) = p.periods {
            if !half_int(n) {
                return Err(RunError::schema("params.periods", "must be a positive multiple of 0.5"));
            }
        }
        if !(p.wavelength > 0.0 && p.period > 0.0 && p.cavity_length >= 0.0) {
            return Err(RunError::schema("params", "wavelength and period must be positive, cavity_length non-negative"));
        }
        if !(p.duty > 0.0 && p.duty < 1.0) {
            return Err(RunError::schema("params.duty", "must lie strictly between 0 and 1"));
        }
        if p.n_lo.is_some() != p.n_hi.is_some() {
            return Err(RunError::schema("params.n_lo", "give both n_lo and n_hi or neither"));
        }
        if let Some(f) = &p.matrix_file {
            if !f.is_file() {
                return Err(RunError::schema("params.matrix_file", format!("{} does not exist", f.display())));
            }
        }
        let has_indices = p.n_lo.is_some();
        match self.command {
            Command::Modes | Command::Modevol | Command::Design => {
                self.structure()?;
            }
            Command::Dbr if !has_indices => {
                self.structure()?;
            }
            Command::Nacmt if p.matrix_file.is_none() => {
                if self.structure()?.guides < 2 {
                    return Err(RunError::schema("structure.guides", "NA-CMT needs at least 2 guides"));
                }
            }
            Command::Couple => {
                let lateral = p.kappa.is_some() || self.structure.as_ref().is_some_and(|s| s.guides >= 2);
                let longitudinal = self.explicit_mirror().is_some() || p.periods.is_some();
                if !lateral && !longitudinal {
                    return Err(RunError::schema(
                        "params",
                        "couple needs kappa (with n_eff), a structure with at least 2 guides, periods, or reflectivity + grating_length + n_dbr",
                    ));
                }
                if p.kappa.is_some() && p.n_eff.is_none() {
                    return Err(RunError::schema("params.n_eff", "required with kappa"));
                }
                if p.periods.is_some() && !has_indices && self.structure.is_none() {
                    return Err(RunError::schema("params.periods", "needs n_lo and n_hi or a structure"));
                }
            }
            _ => {}
        }
        if self.command == Command::Design && !p.target_j.is_some_and(|t| t > 0.0) {
            return Err(RunError::schema("params.target_j", "design needs a positive target rate (rad/s)"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the parsed config.
    ///
    /// Defaults are filled in before hashing and the output destination is
    /// left out, so configs that request the same computation hash alike. A
    /// matrix file enters through its contents, not its path.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output = None;
        let mut v = serde_json::to_value(&canon).expect("config serializes");
        if let Some(f) = &self.params.matrix_file {
            let content = std::fs::read(f).unwrap_or_default();
            v["params"]["matrix_file"] = Value::String(format!("sha256:{}", hex(&Sha256::digest(&content))));
        }
        hex(&Sha256::digest(serde_json::to_vec(&v).expect("value serializes")))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Rows of numbers under unit-bearing column names; `None` prints as an empty cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    /// Producing module and version, e.g. `dbr/0.1.0`.
    pub module: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    fn new(module: &str, columns: &[&str]) -> Self {
        Self { module: format!("{module}/{VERSION}"), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row.into_iter().map(Some).collect());
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("version,{}\n", self.columns.join(","));
        for row in &self.rows {
            out.push_str(&self.module);
            for c in row {
                out.push(',');
                if let Some(v) = c {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultEnvelope {
    pub tool: String,
    pub version: String,
    /// Command name, or `figure:<name>`.
    pub command: String,
    pub config_hash: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub units: BTreeMap<&'static str, &'static str>,
    pub payload: Value,
    #[serde(skip)]
    pub table: Table,
}

fn units() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("config_lengths", "nm"),
        ("output_lengths", "um"),
        ("rates", "rad/s"),
        ("propagation_constants", "rad/um"),
        ("coupling_elements", "rad^2/um^2"),
        ("volumes", "um^3"),
    ])
}

fn now_ms() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl ResultEnvelope {
    fn new(command: String, config_hash: String, started: u64, (payload, table): (Value, Table)) -> Self {
        Self {
            tool: "slotcav".into(),
            version: VERSION.into(),
            command,
            config_hash,
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
            units: units(),
            payload,
            table,
        }
    }

    /// The payload alone; identical configs give identical bytes.
    pub fn payload_json(&self) -> String {
        serde_json::to_string(&self.payload).expect("payload serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes") + "\n"
    }

    pub fn to_csv(&self) -> String {
        self.table.to_csv()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, out: &Output) -> Result<(), RunError> {
        if let Some(dir) = out.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        }
        std::fs::write(&out.path, self.render(out.format)).map_err(|e| RunError::io(&out.path, e))
    }
}

fn tagged(module: &str, mut payload: Value) -> Value {
    payload["module"] = Value::String(format!("{module}/{VERSION}"));
    payload
}

/// Computes the command of `config` and writes the envelope to `config.output`, if set.
pub fn run(config: &RunConfig) -> Result<ResultEnvelope, RunError> {
    config.validate()?;
    let started = now_ms();
    let body = match config.command {
        Command::Modes => run_modes(config)?,
        Command::Couple => run_couple(config)?,
        Command::Nacmt => run_nacmt(config)?,
        Command::Dbr => run_dbr(config)?,
        Command::Modevol => run_modevol(config)?,
        Command::Design => run_design(config)?,
    };
    let env = ResultEnvelope::new(config.command.name().into(), config.hash(), started, body);
    if let Some(out) = &config.output {
        env.write(out)?;
    }
    Ok(env)
}

type Body = (Value, Table);

fn run_modes(cfg: &RunConfig) -> Result<Body, RunError> {
    let spec = cfg.structure()?;
    let map = cfg.grid.cross_section(spec)?;
    let n = cfg.params.num_modes.unwrap_or(map.slot_centers.len().max(1));
    let modes = solve_te_modes(&map, &SolveRequest::guided(n, spec.wavelength, &map))?;
    let mut table = Table::new("modesolver", &["mode", "x_um", "y_um", "Ex"]);
    for (k, m) in modes.iter().enumerate() {
        let g = &m.grid;
        for i in 0..g.nx {
            for j in 0..g.ny {
                table.push(vec![k as f64, g.x(i) * 1e-3, g.y(j) * 1e-3, m.field[g.idx(i, j)]]);
            }
        }
    }
    let summaries: Vec<_> = modes.iter().map(|m| m.summary()).collect();
    Ok((tagged("modesolver", json!({ "requested": n, "modes": summaries })), table))
}

fn run_couple(cfg: &RunConfig) -> Result<Body, RunError> {
    let p = &cfg.params;
    let lam = cfg.wavelength();
    let mut payload = json!({});
    let mut row = vec![None; 9];

    let lateral = match (p.kappa, p.n_eff, &cfg.structure) {
        (Some(k), Some(n), _) => Some((k, n)),
        (None, _, Some(s)) if s.guides >= 2 => {
            let ac = array_coupling(s, &cfg.grid)?;
            let report = analyze_tight_binding(&ac.coupling)?;
            payload["tight_binding"] = serde_json::to_value(&report).expect("report serializes");
            Some((report.nn_coupling, ac.n_eff_ref))
        }
        _ => None,
    };
    if let Some((kappa, n_eff)) = lateral {
        let rate = lateral_rate(kappa, n_eff, lam)?;
        row[0] = Some(kappa);
        row[1] = Some(n_eff);
        row[2] = Some(rate.value);
        payload["lateral"] = json!({ "kappa": kappa, "n_eff": n_eff, "rate": rate });
    }

    let mirror = if let Some((r, l_gr_nm, n)) = cfg.explicit_mirror() {
        Some((r, l_gr_nm * 1e-3, n))
    } else if let Some(np) = p.periods {
        let (lo, hi) = cfg.section_indices()?;
        let stack = build_grating(p.period, p.duty, np, lo, hi, lo)?;
        let r = crate::dbr::transfer_matrix(&stack, lam).r;
        payload["grating"] = json!({ "periods": np, "period_nm": p.period, "duty": p.duty, "n_lo": lo, "n_hi": hi });
        Some((r, stack.length(), n_dbr(lo, hi)))
    } else {
        None
    };
    if let Some((r, l_gr, n)) = mirror {
        let l_eff = effective_length(l_gr, r)?;
        let l_hat = p.cavity_length * 1e-3 + 2.0 * l_eff.value;
        let rate = end_to_end_rate(r, l_hat, n)?;
        for (k, v) in [(3, r), (4, l_gr), (5, l_eff.value), (6, l_hat), (7, rate.inputs["tau_s"]), (8, rate.value)] {
            row[k] = Some(v);
        }
        payload["longitudinal"] = json!({
            "r": r, "l_gr_um": l_gr, "effective_length": l_eff, "l_hat_um": l_hat, "n_dbr": n, "rate": rate
        });
    }
    let mut table = Table::new(
        "coupling",
        &["kappa_rad2_per_um2", "n_eff", "J_L_rad_per_s", "R", "L_gr_um", "L_eff_um", "L_hat_um", "tau_s", "J_E_rad_per_s"],
    );
    table.rows.push(row);
    Ok((tagged("coupling", payload), table))
}

fn matrix_table(m: &CouplingMatrix) -> Table {
    let cols: Vec<String> = std::iter::once("row".to_string()).chain((0..m.size()).map(|j| format!("M_{j}_rad2_per_um2"))).collect();
    let mut table = Table::new("cmt", &cols.iter().map(String::as_str).collect::<Vec<_>>());
    for (i, r) in m.rows.iter().enumerate() {
        table.push(std::iter::once(i as f64).chain(r.iter().copied()).collect());
    }
    table
}

fn run_nacmt(cfg: &RunConfig) -> Result<Body, RunError> {
    if let Some(f) = &cfg.params.matrix_file {
        let text = std::fs::read_to_string(f).map_err(|e| RunError::io(f, e))?;
        let m = CouplingMatrix::parse(&text, cfg.params.beta_ref.unwrap_or(0.0))?;
        let report = analyze_tight_binding(&m)?;
        let payload = json!({ "source": "matrix_file", "coupling": m, "report": report });
        return Ok((tagged("cmt", payload), matrix_table(&m)));
    }
    let ac = array_coupling(cfg.structure()?, &cfg.grid)?;
    let report = analyze_tight_binding(&ac.coupling)?;
    let n_eff: Vec<f64> = ac.supermodes.modes.iter().map(|m| m.n_eff).collect();
    let payload = json!({
        "source": "solver",
        "supermode_n_eff": n_eff,
        "supermode_beta": ac.supermodes.chis(),
        "n_eff_ref": ac.n_eff_ref,
        "amplitudes": ac.amplitudes,
        "coupling": ac.coupling,
        "relative": ac.coupling.relative(),
        "report": report,
    });
    Ok((tagged("cmt", payload), matrix_table(&ac.coupling)))
}

fn spectra_table(curves: &[SweepCurve]) -> Table {
    let mut table = Table::new("dbr", &["N_p", "P_um", "R", "T"]);
    for c in curves {
        for ((p, r), t) in c.spectrum.axis.iter().zip(&c.spectrum.r).zip(&c.spectrum.t) {
            table.push(vec![c.periods, p * 1e-3, *r, *t]);
        }
    }
    table
}

fn dbr_sweep(n_lo: f64, n_hi: f64, duty: f64, periods: &[f64], counts: &[f64], lam: f64) -> Result<Body, RunError> {
    let template = build_grating(periods[0], duty, counts[0], n_lo, n_hi, n_lo)?;
    let curves = reflectivity_sweep(&template, periods, counts, lam)?;
    let t_max: Vec<f64> = curves.iter().map(|c| 1.0 - c.r_max).collect();
    let summary: Vec<Value> = curves
        .iter()
        .map(|c| json!({ "periods": c.periods, "argmax_period_um": c.argmax_period * 1e-3, "r_max": c.r_max }))
        .collect();
    let payload = json!({
        "n_lo": n_lo,
        "n_hi": n_hi,
        "duty": duty,
        "wavelength_um": lam * 1e-3,
        "curves": summary,
        "log10_transmission_slope_per_period": log_linear_slope(counts, &t_max),
        "spectra": curves,
    });
    Ok((tagged("dbr", payload), spectra_table(&curves)))
}

fn run_dbr(cfg: &RunConfig) -> Result<Body, RunError> {
    let (lo, hi) = cfg.section_indices()?;
    dbr_sweep(lo, hi, cfg.params.duty, &cfg.sweep.period.values(), &cfg.sweep.period_counts, cfg.wavelength())
}

fn run_modevol(cfg: &RunConfig) -> Result<Body, RunError> {
    let spec = cfg.structure()?;
    let p = &cfg.params;
    let lam = spec.wavelength;
    let (map, mode) = reference_mode(spec, &cfg.grid)?;
    let (l_hat, source, grating) = if let Some(np) = p.periods {
        let (lo, hi) = match (p.n_lo, p.n_hi) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => (mode.n_eff, crate::design::solid_index(spec, &cfg.grid)?),
        };
        let g = grating_point(np, p.period, lo, hi, p.cavity_length * 1e-3, lam)?;
        (g.l_hat, "grating", Some(g))
    } else if p.cavity_length > 0.0 {
        (p.cavity_length * 1e-3, "cavity_length", None)
    } else {
        (lam * 1e-3 / 2.0, "half_wavelength", None)
    };
    let v = mode_volume(&mode, &map, l_hat)?;
    let omega = rabi_frequency(v.volume, p.dipole, lam, v.n_at_max)?;
    let payload = json!({
        "mode": mode.summary(),
        "length_source": source,
        "grating": grating,
        "volume": v,
        "dipole_cm": p.dipole,
        "omega_rad_per_s": omega,
    });
    let mut table = Table::new(
        "coupling",
        &["V_um3", "V_lambda3_over_n", "V_lambda_over_n_cubed", "A_eff_um2", "L_hat_um", "Omega_rad_per_s"],
    );
    table.push(vec![v.volume, v.lambda3_over_n, v.lambda_over_n_cubed, v.effective_area, l_hat, omega]);
    Ok((tagged("coupling", payload), table))
}

fn run_design(cfg: &RunConfig) -> Result<Body, RunError> {
    let p = &cfg.params;
    let opts = DesignOptions {
        separations_um: cfg.sweep.separations.iter().map(|d| d * 1e-3).collect(),
        period_nm: p.period,
        cavity_length_um: p.cavity_length * 1e-3,
        dipole_cm: p.dipole,
    };
    let target = p.target_j.ok_or_else(|| RunError::schema("params.target_j", "required by `design`"))?;
    let report = jch_report(target, cfg.structure()?, &cfg.grid, &opts)?;
    let mut table = Table::new("design", &["d_um", "kappa_rad2_per_um2", "self_rad2_per_um2", "J_L_rad_per_s"]);
    for l in &report.intermediates.lateral {
        table.push(vec![l.d, l.kappa, l.self_term, l.j_l]);
    }
    Ok((tagged("design", serde_json::to_value(&report).expect("report serializes")), table))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig3,
    Fig7a,
    Fig7b,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fig3 => "fig3",
            Self::Fig7a => "fig7a",
            Self::Fig7b => "fig7b",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Fig3, Self::Fig7a, Self::Fig7b].into_iter().find(|f| f.name() == s)
    }
}

/// Lateral rate against separation for the reference diamond slot.
pub fn fig3_table(slot: &SlotArraySpec, grid: &GridSpec, ds_um: &[f64]) -> Result<Body, RunError> {
    let (_, mode) = reference_mode(slot, grid)?;
    let pts = lateral_sweep(slot, ds_um, grid, mode.n_eff, mode.beta)?;
    let fit = fit_exponential(&pts.iter().map(|p| (p.d, p.j_l)).collect::<Vec<_>>())?;
    let mut table = Table::new("design", &["d_um", "kappa_rad2_per_um2", "J_L_rad_per_s"]);
    for p in &pts {
        table.push(vec![p.d, p.kappa, p.j_l]);
    }
    let payload = json!({ "n_eff_ref": mode.n_eff, "points": pts, "fit": fit });
    Ok((tagged("design", payload), table))
}

/// End-to-end rate against the number of periods at a fixed period.
pub fn fig7b_table(n_lo: f64, n_hi: f64, period: f64, counts: &[f64], lam: f64) -> Result<Body, RunError> {
    let pts: Vec<GratingPoint> =
        counts.iter().map(|&np| grating_point(np, period, n_lo, n_hi, 0.0, lam)).collect::<Result<_, _>>()?;
    let mut table = Table::new("design", &["N_p", "R", "L_eff_um", "L_hat_um", "tau_s", "J_E_rad_per_s"]);
    for g in &pts {
        table.push(vec![g.periods, g.r, g.l_eff, g.l_hat, g.tau, g.j_e]);
    }
    let rates: Vec<f64> = pts.iter().map(|g| g.j_e).collect();
    let payload = json!({
        "n_lo": n_lo,
        "n_hi": n_hi,
        "period_um": period * 1e-3,
        "points": pts,
        "log10_rate_slope_per_period": log_linear_slope(counts, &rates),
    });
    Ok((tagged("design", payload), table))
}

/// Runs the canned sweep behind one of the figures on the default diamond slot and grid.
pub fn reproduce_figure(fig: Figure) -> Result<ResultEnvelope, RunError> {
    let started = now_ms();
    let slot = SlotArraySpec::diamond_slot();
    let grid = GridSpec::default();
    let sweep = Sweep::default();
    let lam = slot.wavelength;
    let body = match fig {
        Figure::Fig3 => fig3_table(&slot, &grid, &DEFAULT_SEPARATIONS)?,
        Figure::Fig7a => {
            let (lo, hi) = grating_indices(&slot, &grid)?;
            dbr_sweep(lo, hi, 0.5, &sweep.period.values(), &sweep.period_counts, lam)?
        }
        Figure::Fig7b => {
            let (lo, hi) = grating_indices(&slot, &grid)?;
            fig7b_table(lo, hi, 220.0, &sweep.period_counts, lam)?
        }
    };
    let canon = json!({ "figure": fig.name(), "structure": slot, "grid": grid, "sweep": sweep });
    let hash = hex(&Sha256::digest(serde_json::to_vec(&canon).expect("value serializes")));
    Ok(ResultEnvelope::new(format!("figure:{}", fig.name()), hash, started, body))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_names_command() {
        match RunConfig::parse("", None, None).unwrap_err() {
            RunError::Schema { field, .. } => assert_eq!(field, "command"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::parse("command = \"dbr\"\nbogus = 1\n[params]\nn_lo = 1.3\nn_hi = 1.6\n", None, None).unwrap_err();
        assert!(matches!(err, RunError::Schema { ref field, .. } if field == "bogus"), "{err:?}");
    }

    #[test]
    fn range_is_inclusive() {
        assert_eq!(Range { start: 200.0, stop: 202.0, step: 1.0 }.values(), vec![200.0, 201.0, 202.0]);
        assert_eq!(Range { start: 200.0, stop: 240.0, step: 1.0 }.values().len(), 41);
    }

    #[test]
    fn hash_ignores_layout_and_explicit_defaults() {
        let a = RunConfig::parse("command = \"dbr\"\n[params]\nn_lo = 1.3\nn_hi = 1.6\n", None, None).unwrap();
        let b = RunConfig::parse("# same run\n[params]\nn_hi = 1.6\nduty = 0.5\nn_lo = 1.3\n\n", None, Some(Command::Dbr)).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse("command = \"dbr\"\n[params]\nn_lo = 1.3\nn_hi = 1.61\n", None, None).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn command_conflict() {
        let err = RunConfig::parse("command = \"modes\"\n", None, Some(Command::Dbr)).unwrap_err();
        assert!(matches!(err, RunError::Schema { ref field, .. } if field == "command"));
    }

    #[test]
    fn csv_rows_carry_version() {
        let mut t = Table::new("dbr", &["N_p", "R"]);
        t.push(vec![4.5, 0.5]);
        t.rows.push(vec![Some(9.5), None]);
        let csv = t.to_csv();
        assert_eq!(csv, format!("version,N_p,R\ndbr/{VERSION},4.5,0.5\ndbr/{VERSION},9.5,\n"));
    }
}
