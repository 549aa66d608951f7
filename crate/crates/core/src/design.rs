//! Inverse design: geometry for target hopping rates.
//!
//! Lateral rates decay exponentially with guide separation and end-to-end
//! rates decay exponentially with the number of Bragg periods, so both
//! targets are reached by inverting a fitted or tabulated curve.

use serde::{Deserialize, Serialize};

use crate::cmt::{extract_amplitudes, nacmt, solve_isolated, solve_supermodes, CouplingMatrix};
use crate::coupling::{effective_length, end_to_end_rate, lateral_rate, mode_volume, rabi_frequency, round_trip_time};
use crate::dbr::{build_grating, transfer_matrix};
use crate::error::{CmtError, DesignError};
use crate::geometry::{build_solid_guide, Arrangement, GridSpec, SlotArraySpec};
use crate::modesolver::{solve_te_modes, SolveRequest};

/// Default separations (um) of the lateral sweep.
pub const DEFAULT_SEPARATIONS: [f64; 9] = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3];
/// Default period counts of the grating sweep.
pub const DEFAULT_PERIOD_COUNTS: [f64; 8] = [4.5, 9.5, 14.5, 19.5, 24.5, 29.5, 34.5, 39.5];
/// Largest number of periods `solve_periods` will consider.
pub const MAX_PERIODS: f64 = 200.0;
/// Smallest grating transmission trusted by `solve_periods`.
pub const MIN_TRANSMISSION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    /// Fitted rate at `d0` (rad/s).
    pub j0: f64,
    /// Decay constant (1/um).
    pub gamma: f64,
    /// Reference separation (um), the smallest fitted one.
    pub d0: f64,
    /// Largest fitted separation (um).
    pub d_max: f64,
    pub r_squared: f64,
    /// False when `gamma <= 0`.
    pub decaying: bool,
}

impl ExpFit {
    pub fn eval(&self, d: f64) -> f64 {
        self.j0 * (-self.gamma * (d - self.d0)).exp()
    }
}

/// Least-squares fit of `ln J` against `d` (um). Points with `J <= 0` are rejected.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExpFit, DesignError> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0 && p.0.is_finite()).map(|&(d, j)| (d, j.ln())).collect();
    let d0 = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let d_max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if pts.len() < 2 || d_max == d0 {
        return Err(DesignError::TooFewPoints { needed: 2, got: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0 - d0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - d0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - d0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * (p.0 - d0)).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    let gamma = if slope == 0.0 { 0.0 } else { -slope };
    Ok(ExpFit { j0: intercept.exp(), gamma, d0, d_max, r_squared, decaying: gamma > 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    /// um
    pub d: f64,
    /// Outside the fitted separation range.
    pub extrapolated: bool,
}

/// Separation (um) at which the fitted lateral rate equals `target` (rad/s).
pub fn solve_separation(fit: &ExpFit, target: f64) -> Result<Separation, DesignError> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(DesignError::InvalidTarget(target));
    }
    if !(fit.gamma > 0.0) {
        return Err(DesignError::NotDecaying(fit.gamma));
    }
    let d = fit.d0 + (fit.j0 / target).ln() / fit.gamma;
    let tol = 1e-9 * fit.d_max.abs().max(1.0);
    Ok(Separation { d, extrapolated: d < fit.d0 - tol || d > fit.d_max + tol })
}

/// One point of the end-to-end rate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingPoint {
    pub periods: f64,
    pub r: f64,
    /// um
    pub l_gr: f64,
    /// um
    pub l_eff: f64,
    /// um
    pub l_hat: f64,
    /// s
    pub tau: f64,
    /// rad/s
    pub j_e: f64,
}

/// Effective index of the combined slot and grating system, the mean of the two section indices.
pub fn n_dbr(n_lo: f64, n_hi: f64) -> f64 {
    0.5 * (n_lo + n_hi)
}

/// End-to-end rate of two cavities of length `l_c` (um) sharing a grating of
/// `periods` periods of `period` nm, 50/50 duty, embedded in the slot guide.
pub fn grating_point(
    periods: f64,
    period: f64,
    n_lo: f64,
    n_hi: f64,
    l_c: f64,
    wavelength: f64,
) -> Result<GratingPoint, DesignError> {
    let stack = build_grating(period, 0.5, periods, n_lo, n_hi, n_lo)?;
    let r = transfer_matrix(&stack, wavelength).r;
    let l_gr = stack.length();
    let l_eff = effective_length(l_gr, r)?.value;
    let l_hat = l_c + 2.0 * l_eff;
    let n = n_dbr(n_lo, n_hi);
    let j_e = end_to_end_rate(r, l_hat, n)?.value;
    Ok(GratingPoint { periods, r, l_gr, l_eff, l_hat, tau: round_trip_time(l_hat, n), j_e })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodSolution {
    pub point: GratingPoint,
    /// Largest rate the model supports (fewest periods with `T <= 0.1`).
    pub bound: f64,
}

/// Smallest half-integer period count whose end-to-end rate does not exceed `target` (rad/s).
///
/// The search stops at [`MAX_PERIODS`], or earlier where `1 - R` drops below
/// [`MIN_TRANSMISSION`] and is no longer resolved.
///
/// The rate formula assumes `T << 1`, so gratings transmitting more than 10%
/// are not considered; a target above the rate of the shortest admissible
/// grating is reported as unreachable.
pub fn solve_periods(
    target: f64,
    period: f64,
    n_lo: f64,
    n_hi: f64,
    l_c: f64,
    wavelength: f64,
) -> Result<PeriodSolution, DesignError> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(DesignError::InvalidTarget(target));
    }
    let mut bound = None;
    let mut np = 0.5;
    while np <= MAX_PERIODS {
        let p = grating_point(np, period, n_lo, n_hi, l_c, wavelength)?;
        if 1.0 - p.r < MIN_TRANSMISSION {
            // 1 - R is down to rounding noise; smaller rates would be artefacts
            return Err(DesignError::TargetTooSmall { target, max_periods: np - 0.5 });
        }
        if 1.0 - p.r <= crate::coupling::WEAK_MIRROR_T {
            let b = *bound.get_or_insert(p.j_e);
            if target > b {
                return Err(DesignError::TargetTooLarge { target, bound: b });
            }
            if p.j_e <= target {
                return Ok(PeriodSolution { point: p, bound: b });
            }
        }
        np += 0.5;
    }
    Err(DesignError::TargetTooSmall { target, max_periods: MAX_PERIODS })
}

/// Lateral coupling at one separation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LateralPoint {
    /// Centre-to-centre separation (um).
    pub d: f64,
    /// `|M_01|` (rad^2/um^2).
    pub kappa: f64,
    /// `M_00 - beta_ref^2` (rad^2/um^2).
    pub self_term: f64,
    /// rad/s
    pub j_l: f64,
    /// Supermode effective indices, descending.
    pub n_eff: Vec<f64>,
}

/// Isolated single-slot fundamental mode of `slot` on its own grid.
pub fn reference_mode(slot: &SlotArraySpec, grid: &GridSpec) -> Result<(crate::geometry::IndexMap, crate::modesolver::ModeSolution), DesignError> {
    let single = SlotArraySpec { arrangement: Arrangement::Single, guides: 1, cladding_gap: 0.0, ..slot.clone() };
    Ok(solve_isolated(&single, 0, grid)?)
}

/// Effective index of the unslotted grating section, a solid rod of width `2 w_R + w_s`.
pub fn solid_index(slot: &SlotArraySpec, grid: &GridSpec) -> Result<f64, DesignError> {
    let width = 2.0 * slot.rod_width + slot.slot_width;
    let solid = build_solid_guide(width, slot.height, &slot.rod_material, grid.dx, grid.dy, grid.padding)?;
    let modes = solve_te_modes(&solid, &SolveRequest::guided(1, slot.wavelength, &solid))?;
    Ok(modes.first().ok_or(CmtError::InsufficientModes { needed: 1, found: 0 })?.n_eff)
}

/// Grating section indices `(n_lo, n_hi)`: the slot guide and the solid rod.
pub fn grating_indices(slot: &SlotArraySpec, grid: &GridSpec) -> Result<(f64, f64), DesignError> {
    let (_, mode) = reference_mode(slot, grid)?;
    Ok((mode.n_eff, solid_index(slot, grid)?))
}

/// Two-guide coupling of `slot` at each centre-to-centre separation in `ds` (um).
///
/// Points are returned in input order whatever the evaluation order.
pub fn lateral_sweep(slot: &SlotArraySpec, ds: &[f64], grid: &GridSpec, n_eff_ref: f64, beta_ref: f64) -> Result<Vec<LateralPoint>, DesignError> {
    let point = |&d: &f64| -> Result<LateralPoint, DesignError> {
        let gap = d * 1e3 - 2.0 * slot.rod_width - slot.slot_width;
        let spec = SlotArraySpec { arrangement: Arrangement::CladdingSeparated, guides: 2, cladding_gap: gap, ..slot.clone() };
        let set = solve_supermodes(&spec, grid)?;
        let a = extract_amplitudes(&set)?;
        let m: CouplingMatrix = nacmt(&a, &set.chis())?;
        let kappa = 0.5 * (m.rows[0][1].abs() + m.rows[1][0].abs());
        let j_l = lateral_rate(kappa, n_eff_ref, slot.wavelength)?.value;
        Ok(LateralPoint {
            d,
            kappa,
            self_term: m.rows[0][0] - beta_ref * beta_ref,
            j_l,
            n_eff: set.modes.iter().map(|m| m.n_eff).collect(),
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ds.par_iter().map(point).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ds.iter().map(point).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignOptions {
    #[serde(default = "default_separations")]
    pub separations_um: Vec<f64>,
    /// Grating period (nm).
    #[serde(default = "default_period")]
    pub period_nm: f64,
    /// Cavity length between gratings (um).
    #[serde(default)]
    pub cavity_length_um: f64,
    /// Emitter dipole moment (C m).
    #[serde(default = "default_dipole")]
    pub dipole_cm: f64,
}

fn default_separations() -> Vec<f64> {
    DEFAULT_SEPARATIONS.to_vec()
}

fn default_period() -> f64 {
    220.0
}

fn default_dipole() -> f64 {
    1e-30
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { separations_um: default_separations(), period_nm: default_period(), cavity_length_um: 0.0, dipole_cm: default_dipole() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    /// rad/s
    pub target_j: f64,
    /// Lateral centre-to-centre separation (um).
    pub d: f64,
    pub periods: f64,
    /// Grating period (nm).
    pub period: f64,
    /// Mode volume with grating penetration (um^3).
    pub volume: f64,
    /// Single-photon Rabi frequency (rad/s).
    pub omega: f64,
    pub notes: Vec<String>,
    pub intermediates: Intermediates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intermediates {
    pub n_eff_slot: f64,
    pub beta_slot: f64,
    pub lateral: Vec<LateralPoint>,
    pub fit: ExpFit,
    pub d_extrapolated: bool,
    pub n_lo: f64,
    pub n_hi: f64,
    pub grating: GratingPoint,
    pub rate_bound: f64,
    pub volume_lambda3_over_n: f64,
    /// Hard-boundary volume for a `lambda/2` cavity (um^3).
    pub volume_hard: f64,
    pub n_at_max: f64,
}

/// Runs the whole chain for a uniform array with hopping `target_j` (rad/s)
/// in both directions.
pub fn jch_report(target_j: f64, slot: &SlotArraySpec, grid: &GridSpec, opts: &DesignOptions) -> Result<DesignReport, DesignError> {
    if !(target_j > 0.0 && target_j.is_finite()) {
        return Err(DesignError::InvalidTarget(target_j));
    }
    let lam = slot.wavelength;
    let mut notes = Vec::new();

    let (slot_map, slot_mode) = reference_mode(slot, grid)?;
    let lateral = lateral_sweep(slot, &opts.separations_um, grid, slot_mode.n_eff, slot_mode.beta)?;
    let fit = fit_exponential(&lateral.iter().map(|p| (p.d, p.j_l)).collect::<Vec<_>>())?;
    let sep = solve_separation(&fit, target_j)?;
    notes.push(format!(
        "d from exponential fit of {} NA-CMT points (gamma = {:.4} /um, r^2 = {:.5})",
        lateral.len(),
        fit.gamma,
        fit.r_squared
    ));
    if sep.extrapolated {
        notes.push(format!("d = {:.3} um is extrapolated beyond the swept range [{}, {}] um", sep.d, fit.d0, fit.d_max));
    }

    let n_hi = solid_index(slot, grid)?;
    let n_lo = slot_mode.n_eff;
    let periods = solve_periods(target_j, opts.period_nm, n_lo, n_hi, opts.cavity_length_um, lam)?;
    notes.push(format!(
        "N_p from transfer-matrix grating with n_lo = {n_lo:.4}, n_hi = {n_hi:.4}, P = {} nm",
        opts.period_nm
    ));
    if periods.point.periods > DEFAULT_PERIOD_COUNTS[DEFAULT_PERIOD_COUNTS.len() - 1] {
        notes.push(format!("N_p = {} lies beyond the default period sweep", periods.point.periods));
    }

    let hard = mode_volume(&slot_mode, &slot_map, lam * 1e-3 / 2.0)?;
    let vol = mode_volume(&slot_mode, &slot_map, periods.point.l_hat)?;
    let omega = rabi_frequency(vol.volume, opts.dipole_cm, lam, vol.n_at_max)?;
    notes.push("V uses the adjusted length L_c + 2 L_eff; Omega = 2g with eps_r = n(r_max)^2".into());

    Ok(DesignReport {
        target_j,
        d: sep.d,
        periods: periods.point.periods,
        period: opts.period_nm,
        volume: vol.volume,
        omega,
        notes,
        intermediates: Intermediates {
            n_eff_slot: slot_mode.n_eff,
            beta_slot: slot_mode.beta,
            lateral,
            fit,
            d_extrapolated: sep.extrapolated,
            n_lo,
            n_hi,
            grating: periods.point,
            rate_bound: periods.bound,
            volume_lambda3_over_n: vol.lambda3_over_n,
            volume_hard: hard.volume,
            n_at_max: vol.n_at_max,
        },
    })
}
