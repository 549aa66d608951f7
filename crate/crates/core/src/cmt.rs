//! Numerically assisted coupled-mode theory for slot-waveguide arrays.
//!
//! The supermodes of an `N`-guide array are expanded on the isolated-guide
//! modes. Sampling each supermode at the slot centres gives the amplitude
//! matrix `A`, and the coupling matrix follows as `M = A X A^-1` with
//! `X = diag(chi_j^2)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::CmtError;
use crate::geometry::{GridSpec, IndexMap, SlotArraySpec};
use crate::modesolver::{field_at, solve_te_modes, ModeSolution, SolveRequest};

/// Condition number of `A` above which the coupling matrix is flagged unreliable.
pub const CONDITION_WARN: f64 = 1e6;

/// Guided supermodes of an array together with the sampling points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupermodeSet {
    /// Sorted by `n_eff` descending.
    pub modes: Vec<ModeSolution>,
    pub spec: SlotArraySpec,
    /// Slot centres (nm), strictly increasing.
    pub slot_centers: Vec<f64>,
}

impl SupermodeSet {
    /// Propagation constants `chi_j` (rad/um) in mode order.
    pub fn chis(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.beta).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeMatrix {
    /// `rows[m][j]`: field of supermode `j` at slot centre `m`.
    pub rows: Vec<Vec<f64>>,
    /// 2-norm condition number.
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    /// Coupling elements (rad^2/um^2).
    pub rows: Vec<Vec<f64>>,
    /// Isolated-guide propagation constant (rad/um); `0` when unknown.
    pub beta_ref: f64,
    /// Set when `A` was ill-conditioned.
    #[serde(default)]
    pub ill_conditioned: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TightBindingOk,
    Marginal,
    Unsuitable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightBindingReport {
    /// Mean `|M[n][n+-1]|` (rad^2/um^2).
    pub nn_coupling: f64,
    /// Mean `M[n][n] - beta_ref^2` (rad^2/um^2).
    pub self_coupling: f64,
    /// Mean `|M[n][n+-2]|` over `nn_coupling`.
    pub nnn_ratio: f64,
    /// `|M - M^T|_F` over the Frobenius norm of the off-diagonal part of `M`.
    pub asymmetry: f64,
    pub verdict: Verdict,
}

fn to_dmatrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, CmtError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CmtError::Dimension(format!("expected a square {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl AmplitudeMatrix {
    pub fn matrix(&self) -> DMatrix<f64> {
        to_dmatrix(&self.rows).expect("amplitude matrix is square by construction")
    }
}

impl CouplingMatrix {
    pub fn matrix(&self) -> Result<DMatrix<f64>, CmtError> {
        to_dmatrix(&self.rows)
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// `M - beta_ref^2 I`.
    pub fn relative(&self) -> Vec<Vec<f64>> {
        let b2 = self.beta_ref * self.beta_ref;
        let mut r = self.rows.clone();
        for (i, row) in r.iter_mut().enumerate() {
            row[i] -= b2;
        }
        r
    }

    /// Parses a whitespace- or comma-separated square matrix; `#` starts a comment.
    pub fn parse(text: &str, beta_ref: f64) -> Result<Self, CmtError> {
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row: Result<Vec<f64>, _> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|e| CmtError::Parse(format!("line {}: `{t}`: {e}", ln + 1))))
                .collect();
            rows.push(row?);
        }
        if rows.is_empty() {
            return Err(CmtError::Parse("no matrix rows found".into()));
        }
        to_dmatrix(&rows)?;
        Ok(Self { rows, beta_ref, ill_conditioned: false })
    }

    pub fn to_csv(&self) -> String {
        self.rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",") + "\n").collect()
    }
}

/// Samples each supermode at the slot centres (mid-height).
pub fn extract_amplitudes(set: &SupermodeSet) -> Result<AmplitudeMatrix, CmtError> {
    let n = set.slot_centers.len();
    let found = set.modes.iter().filter(|m| m.guided).count();
    if found != n || set.modes.len() != n {
        return Err(CmtError::InsufficientModes { needed: n, found });
    }
    let mut rows = vec![vec![0.0; n]; n];
    for (j, mode) in set.modes.iter().enumerate() {
        for (m, &xc) in set.slot_centers.iter().enumerate() {
            rows[m][j] = field_at(mode, xc, 0.0)?;
        }
    }
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(AmplitudeMatrix { rows, condition: condition_number(&a) })
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `M = A diag(chi^2) A^-1` with `chi` in rad/um.
pub fn nacmt(a: &AmplitudeMatrix, chis: &[f64]) -> Result<CouplingMatrix, CmtError> {
    let am = a.matrix();
    let n = am.nrows();
    if chis.len() != n {
        return Err(CmtError::Dimension(format!("{} propagation constants for a {n}x{n} amplitude matrix", chis.len())));
    }
    let inv = am.clone().try_inverse().ok_or(CmtError::Singular)?;
    if !inv.iter().all(|v| v.is_finite()) {
        return Err(CmtError::Singular);
    }
    let x = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, chis.iter().map(|c| c * c)));
    let m = &am * x * inv;
    Ok(CouplingMatrix { rows: to_rows(&m), beta_ref: 0.0, ill_conditioned: a.condition >= CONDITION_WARN })
}

/// Power-normalized field: `sum E^2 dA = 1` with `dA` in um^2.
fn power_normalized(mode: &ModeSolution) -> Result<Vec<f64>, CmtError> {
    let da = mode.grid.cell_area() * 1e-6;
    let p: f64 = mode.field.iter().map(|e| e * e).sum::<f64>() * da;
    if p == 0.0 {
        return Err(CmtError::Dimension("mode field is identically zero".into()));
    }
    let s = 1.0 / p.sqrt();
    Ok(mode.field.iter().map(|e| e * s).collect())
}

/// Overlap coupling `k^2 sum (n^2 - n_m^2) E_m E_n dA` of power-normalized
/// isolated-guide fields (rad^2/um^2). `k` is in rad/um.
pub fn direct_kappa(
    map_full: &IndexMap,
    map_guide_m_only: &IndexMap,
    mode_m: &ModeSolution,
    mode_n: &ModeSolution,
    k: f64,
) -> Result<f64, CmtError> {
    let g = map_full.grid;
    if map_guide_m_only.grid != g || mode_m.grid != g || mode_n.grid != g {
        return Err(CmtError::GridMismatch);
    }
    let em = power_normalized(mode_m)?;
    let en = power_normalized(mode_n)?;
    let da = g.cell_area() * 1e-6;
    let sum: f64 = map_full
        .eps
        .iter()
        .zip(&map_guide_m_only.eps)
        .zip(em.iter().zip(&en))
        .map(|((ef, eg), (a, b))| (ef - eg) * a * b)
        .sum();
    Ok(k * k * sum * da)
}

/// Tight-binding diagnostics of a coupling matrix.
pub fn analyze_tight_binding(m: &CouplingMatrix) -> Result<TightBindingReport, CmtError> {
    let mat = m.matrix()?;
    let n = mat.nrows();
    if n < 2 {
        return Err(CmtError::Dimension("tight-binding analysis needs at least two guides".into()));
    }
    let band_mean = |offset: usize| {
        let vals: Vec<f64> =
            (0..n - offset).flat_map(|i| [mat[(i, i + offset)].abs(), mat[(i + offset, i)].abs()]).collect();
        if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let nn = band_mean(1);
    let nnn = if n >= 3 { band_mean(2) } else { 0.0 };
    let b2 = m.beta_ref * m.beta_ref;
    let self_coupling = (0..n).map(|i| mat[(i, i)] - b2).sum::<f64>() / n as f64;
    let off_norm = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| mat[(i, j)].powi(2))
        .sum::<f64>()
        .sqrt();
    let skew = (&mat - mat.transpose()).norm();
    let asymmetry = if off_norm > 0.0 { skew / off_norm } else { 0.0 };
    let nnn_ratio = if nn > 0.0 { nnn / nn } else { 0.0 };

    let verdict = if nn == 0.0 || nnn_ratio > 0.2 || asymmetry > 0.1 {
        Verdict::Unsuitable
    } else if nnn_ratio < 0.1 && asymmetry < 0.02 && self_coupling.abs() / nn < 0.3 {
        Verdict::TightBindingOk
    } else {
        Verdict::Marginal
    };
    Ok(TightBindingReport { nn_coupling: nn, self_coupling, nnn_ratio, asymmetry, verdict })
}

/// Guided quasi-TE supermodes of the full array described by `spec`.
///
/// Up to `N` modes are kept; fewer means the array cannot be described by an
/// `N`-guide coupled-mode model, which [`extract_amplitudes`] reports.
pub fn solve_supermodes(spec: &SlotArraySpec, grid: &GridSpec) -> Result<SupermodeSet, CmtError> {
    let map = grid.cross_section(spec).map_err(crate::error::SolverError::from)?;
    let n = map.slot_centers.len();
    let modes = solve_te_modes(&map, &SolveRequest::guided(n, spec.wavelength, &map))?;
    Ok(SupermodeSet { modes, spec: spec.clone(), slot_centers: map.slot_centers.clone() })
}

/// Fundamental mode of guide `guide` alone, on the grid of the full array.
pub fn solve_isolated(spec: &SlotArraySpec, guide: usize, grid: &GridSpec) -> Result<(IndexMap, ModeSolution), CmtError> {
    let map = grid.guide_only(spec, guide).map_err(crate::error::SolverError::from)?;
    let modes = solve_te_modes(&map, &SolveRequest::guided(1, spec.wavelength, &map))?;
    let mode = modes.into_iter().next().ok_or(CmtError::InsufficientModes { needed: 1, found: 0 })?;
    Ok((map, mode))
}

/// Everything NA-CMT produces for one array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayCoupling {
    pub supermodes: SupermodeSet,
    pub amplitudes: AmplitudeMatrix,
    pub coupling: CouplingMatrix,
    /// Effective index of the isolated guide.
    pub n_eff_ref: f64,
}

/// Solves the array and its isolated guide, then back-calculates `M`.
pub fn array_coupling(spec: &SlotArraySpec, grid: &GridSpec) -> Result<ArrayCoupling, CmtError> {
    let supermodes = solve_supermodes(spec, grid)?;
    let amplitudes = extract_amplitudes(&supermodes)?;
    let mut coupling = nacmt(&amplitudes, &supermodes.chis())?;
    let (_, iso) = solve_isolated(spec, 0, grid)?;
    coupling.beta_ref = iso.beta;
    Ok(ArrayCoupling { supermodes, amplitudes, coupling, n_eff_ref: iso.n_eff })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amp(rows: Vec<Vec<f64>>) -> AmplitudeMatrix {
        let a = DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j]);
        AmplitudeMatrix { condition: condition_number(&a), rows }
    }

    #[test]
    fn single_guide_is_identity_transform() {
        let m = nacmt(&amp(vec![vec![1.0]]), &[12.9]).unwrap();
        assert!((m.rows[0][0] - 12.9 * 12.9).abs() < 1e-12);
    }

    #[test]
    fn two_guide_closed_form() {
        let (cp, cm) = (13.0, 12.8);
        let m = nacmt(&amp(vec![vec![1.0, 1.0], vec![1.0, -1.0]]), &[cp, cm]).unwrap();
        assert!((m.rows[0][1] - (cp * cp - cm * cm) / 2.0).abs() < 1e-12);
        assert!((m.rows[0][0] - (cp * cp + cm * cm) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_amplitudes_rejected() {
        let err = nacmt(&amp(vec![vec![1.0, 1.0], vec![1.0, 1.0]]), &[1.0, 2.0]).unwrap_err();
        assert_eq!(err, CmtError::Singular);
    }

    #[test]
    fn diagonal_matrix_is_unsuitable() {
        let m = CouplingMatrix { rows: vec![vec![2.0, 0.0], vec![0.0, 2.0]], beta_ref: 0.0, ill_conditioned: false };
        let r = analyze_tight_binding(&m).unwrap();
        assert_eq!(r.nn_coupling, 0.0);
        assert_eq!(r.verdict, Verdict::Unsuitable);
    }

    #[test]
    fn parse_rejects_ragged_rows() {
        assert!(CouplingMatrix::parse("1 2\n3", 0.0).is_err());
        let m = CouplingMatrix::parse("# comment\n1, 2\n3 4 # trailing\n", 0.0).unwrap();
        assert_eq!(m.rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }
}
