//! Tight-binding rates and cavity-QED figures from classical solver output.
//!
//! Inputs follow the crate conventions: wavelengths in nm, cavity and grating
//! lengths in um, coupling elements in rad^2/um^2. Every rate is in rad/s.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CouplingError;
use crate::geometry::IndexMap;
use crate::modesolver::ModeSolution;
use crate::units::{wavenumber_per_um, C, C_UM_PER_S, EPS0, HBAR};

/// Transmission above which the `T << 1` approximation of the end-to-end rate is flagged.
pub const WEAK_MIRROR_T: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    /// Physical length between the gratings (um).
    pub l_c: f64,
    /// Grating length (um).
    pub l_gr: f64,
    /// Grating power reflection coefficient.
    pub r: f64,
    /// Effective index of slot plus gratings.
    pub n_eff: f64,
    /// Wavelength (nm).
    pub wavelength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// rad/s
    pub value: f64,
    pub formula: String,
    pub inputs: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl RateResult {
    fn new(value: f64, formula: &str, inputs: &[(&str, f64)]) -> Self {
        Self {
            value,
            formula: formula.into(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            warnings: vec![],
        }
    }
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), CouplingError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(CouplingError::OutOfRange { name, value, reason })
    }
}

/// Lateral hopping `J_L = c kappa / (2 n_eff k)`.
pub fn lateral_rate(kappa: f64, n_eff: f64, wavelength_nm: f64) -> Result<RateResult, CouplingError> {
    check("kappa", kappa, kappa >= 0.0, "use |M_mn|")?;
    check("n_eff", n_eff, n_eff >= 1.0, "must be at least 1")?;
    check("wavelength", wavelength_nm, wavelength_nm > 0.0, "must be positive")?;
    let k = wavenumber_per_um(wavelength_nm);
    let j = C_UM_PER_S * kappa / (2.0 * n_eff * k);
    Ok(RateResult::new(j, "J_L = c*kappa/(2*n_eff*k)", &[("kappa_rad2_per_um2", kappa), ("n_eff", n_eff), ("wavelength_nm", wavelength_nm)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveLength {
    /// um
    pub value: f64,
    /// Set when `R = 1` and the limit value `0` was returned.
    pub limit: bool,
}

/// Grating penetration length `L_gr sqrt(R) / (2 atanh(sqrt(R)))` (um).
pub fn effective_length(l_gr: f64, r: f64) -> Result<EffectiveLength, CouplingError> {
    check("l_gr", l_gr, l_gr >= 0.0, "must be non-negative")?;
    check("r", r, (0.0..=1.0).contains(&r), "reflection must lie in [0, 1]")?;
    if r == 1.0 {
        return Ok(EffectiveLength { value: 0.0, limit: true });
    }
    let s = r.sqrt();
    // x / atanh(x) -> 1 - x^2/3 as x -> 0
    let ratio = if s < 1e-6 { 1.0 - s * s / 3.0 } else { s / s.atanh() };
    Ok(EffectiveLength { value: l_gr * ratio / 2.0, limit: false })
}

/// `L_c + 2 L_eff` (um).
pub fn adjusted_length(l_c: f64, l_eff: f64) -> Result<f64, CouplingError> {
    check("l_c", l_c, l_c >= 0.0, "must be non-negative")?;
    check("l_eff", l_eff, l_eff >= 0.0, "must be non-negative")?;
    Ok(l_c + 2.0 * l_eff)
}

/// Round-trip time `L_hat N_eff / c` (s).
pub fn round_trip_time(l_hat: f64, n_eff: f64) -> f64 {
    l_hat * n_eff / C_UM_PER_S
}

/// End-to-end hopping `J_E = 2 pi (1 - sqrt(R)) / tau`.
pub fn end_to_end_rate(r: f64, l_hat: f64, n_eff: f64) -> Result<RateResult, CouplingError> {
    check("r", r, (0.0..=1.0).contains(&r), "reflection must lie in [0, 1]")?;
    check("n_eff", n_eff, n_eff >= 1.0, "must be at least 1")?;
    check("l_hat", l_hat, l_hat >= 0.0, "must be non-negative")?;
    if l_hat == 0.0 {
        return Err(CouplingError::ZeroLength);
    }
    let tau = round_trip_time(l_hat, n_eff);
    let j = 2.0 * std::f64::consts::PI * (1.0 - r.sqrt()) / tau;
    let mut out = RateResult::new(
        j,
        "J_E = 2*pi*(1 - sqrt(R))/tau, tau = L_hat*N_eff/c",
        &[("r", r), ("l_hat_um", l_hat), ("n_eff", n_eff), ("tau_s", tau)],
    );
    if 1.0 - r > WEAK_MIRROR_T {
        out.warnings.push(format!("T = {:.3} is not small; the rate formula assumes T << 1", 1.0 - r));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeVolume {
    /// um^3
    pub volume: f64,
    /// Volume in units of `lambda^3 / n_rod`.
    pub lambda3_over_n: f64,
    /// Volume in units of `(lambda / n_rod)^3`.
    pub lambda_over_n_cubed: f64,
    /// `sum n^2 E^2 dA / max(n^2 E^2)` (um^2).
    pub effective_area: f64,
    /// Refractive index where `n^2 E^2` peaks.
    pub n_at_max: f64,
    /// Adjusted cavity length used (um).
    pub l_hat: f64,
}

/// Mode volume with a `sin^2` standing wave over the adjusted length `l_hat` (um).
pub fn mode_volume(mode: &ModeSolution, map: &IndexMap, l_hat: f64) -> Result<ModeVolume, CouplingError> {
    check("l_hat", l_hat, l_hat > 0.0, "must be positive")?;
    if mode.grid != map.grid {
        return Err(CouplingError::OutOfRange { name: "grid", value: f64::NAN, reason: "mode and map grids differ" });
    }
    let (mut sum, mut max, mut n_at_max) = (0.0, 0.0, 1.0);
    for (e, eps) in mode.field.iter().zip(&map.eps) {
        let w = eps * e * e;
        sum += w;
        if w > max {
            max = w;
            n_at_max = eps.sqrt();
        }
    }
    if max == 0.0 {
        return Err(CouplingError::ZeroField);
    }
    let area = sum / max * map.grid.cell_area() * 1e-6;
    let volume = area * l_hat / 2.0;
    let lam = mode.wavelength * 1e-3;
    let n = map.n_max;
    Ok(ModeVolume {
        volume,
        lambda3_over_n: volume / (lam.powi(3) / n),
        lambda_over_n_cubed: volume / (lam / n).powi(3),
        effective_area: area,
        n_at_max,
        l_hat,
    })
}

/// Single-photon Rabi frequency `2 g` for a dipole `dipole` (C m) in volume `v` (um^3).
pub fn rabi_frequency(v: f64, dipole: f64, wavelength_nm: f64, n_at_max: f64) -> Result<f64, CouplingError> {
    check("volume", v, v > 0.0, "must be positive")?;
    check("n_at_max", n_at_max, n_at_max >= 1.0, "must be at least 1")?;
    let omega = 2.0 * std::f64::consts::PI * C / (wavelength_nm * 1e-9);
    let e_vac = (HBAR * omega / (2.0 * EPS0 * n_at_max * n_at_max * v * 1e-18)).sqrt();
    Ok(2.0 * dipole.abs() * e_vac / HBAR)
}
