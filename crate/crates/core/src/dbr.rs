//! Distributed Bragg reflectors as effective-index stacks.
//!
//! Each grating section is replaced by the fundamental-mode effective index of
//! its cross-section, and the stack is solved with 2x2 transfer matrices
//! acting on forward/backward amplitude pairs `(A, B)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::DbrError;
use crate::geometry::IndexMap;
use crate::modesolver::{solve_te_modes, SolveRequest};

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub n_eff: f64,
    /// um
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GratingStack {
    /// Ordered from the cavity outward.
    pub sections: Vec<Section>,
    /// Period (nm).
    pub period: f64,
    /// Fraction of the period occupied by the solid (high-index) section.
    pub duty: f64,
    /// Number of periods; half-integers allowed.
    pub periods: f64,
    pub n_lo: f64,
    pub n_hi: f64,
    /// Effective index of the slot waveguide on both sides.
    pub surround: f64,
}

impl GratingStack {
    /// Physical grating length (um).
    pub fn length(&self) -> f64 {
        self.sections.iter().map(|s| s.length).sum()
    }

    /// The same stack seen from the other side.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.sections.reverse();
        out
    }

    /// Arbitrary sections between `surround` media; the grating metadata is left empty.
    pub fn from_sections(sections: Vec<Section>, surround: f64) -> Self {
        Self { sections, period: 0.0, duty: 0.5, periods: 0.0, n_lo: surround, n_hi: surround, surround }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    /// Power reflection coefficient.
    pub r: f64,
    /// Power transmission, `1 - r`.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Swept values (period in nm or wavelength in nm).
    pub axis: Vec<f64>,
    pub r: Vec<f64>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub periods: f64,
    pub spectrum: Spectrum,
    /// Period (nm) of maximal reflection.
    pub argmax_period: f64,
    pub r_max: f64,
}

/// Builds a grating of `periods` periods, solid section first.
///
/// Half-integer `periods` give an odd number of segments that also ends on a
/// solid section, making the grating symmetric.
pub fn build_grating(
    period: f64,
    duty: f64,
    periods: f64,
    n_lo: f64,
    n_hi: f64,
    surround: f64,
) -> Result<GratingStack, DbrError> {
    let twice = 2.0 * periods;
    if !(periods >= 0.5) || !periods.is_finite() || (twice - twice.round()).abs() > 1e-9 {
        return Err(DbrError::InvalidPeriods(periods));
    }
    if !(duty > 0.0 && duty < 1.0) {
        return Err(DbrError::InvalidDuty(duty));
    }
    for (name, v) in [("period", period), ("n_lo", n_lo), ("n_hi", n_hi), ("surround", surround)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(DbrError::NonPositive { name, value: v });
        }
    }
    let segments = twice.round() as usize;
    let p_um = period * 1e-3;
    let sections = (0..segments)
        .map(|s| {
            if s % 2 == 0 {
                Section { n_eff: n_hi, length: p_um * duty }
            } else {
                Section { n_eff: n_lo, length: p_um * (1.0 - duty) }
            }
        })
        .collect();
    Ok(GratingStack { sections, period, duty, periods, n_lo, n_hi, surround })
}

fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

pub fn det(m: &Matrix2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Maps amplitudes just left of an interface (index `n_a`) to just right of it
/// (index `n_b`), from continuity of `E` and `n E`. Its determinant is `n_a / n_b`.
pub fn interface_matrix(n_a: f64, n_b: f64) -> Matrix2 {
    let s = 1.0 / (2.0 * n_b);
    let (p, m) = (Complex64::new((n_b + n_a) * s, 0.0), Complex64::new((n_b - n_a) * s, 0.0));
    [[p, m], [m, p]]
}

/// Propagation over `length` um in index `n`; unit determinant.
pub fn propagation_matrix(n: f64, length: f64, wavelength_nm: f64) -> Matrix2 {
    let phi = 2.0 * std::f64::consts::PI / (wavelength_nm * 1e-3) * n * length;
    let z = Complex64::new(0.0, 0.0);
    [[Complex64::from_polar(1.0, phi), z], [z, Complex64::from_polar(1.0, -phi)]]
}

/// System matrix of the whole stack between its surround media.
pub fn system_matrix(stack: &GratingStack, wavelength_nm: f64) -> Matrix2 {
    let mut m = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
    let mut n_prev = stack.surround;
    for s in &stack.sections {
        m = mul(&interface_matrix(n_prev, s.n_eff), &m);
        m = mul(&propagation_matrix(s.n_eff, s.length, wavelength_nm), &m);
        n_prev = s.n_eff;
    }
    mul(&interface_matrix(n_prev, stack.surround), &m)
}

/// Complex amplitude reflection and transmission for light incident from the cavity side.
pub fn amplitudes(stack: &GratingStack, wavelength_nm: f64) -> (Complex64, Complex64) {
    let m = system_matrix(stack, wavelength_nm);
    let r = -m[1][0] / m[1][1];
    let t = det(&m) / m[1][1];
    (r, t)
}

/// Power reflection and transmission of `stack`; `t = 1 - r` for the lossless model.
pub fn transfer_matrix(stack: &GratingStack, wavelength_nm: f64) -> Reflection {
    let (r, _) = amplitudes(stack, wavelength_nm);
    let r = r.norm_sqr().min(1.0);
    Reflection { r, t: 1.0 - r }
}

/// Reflection versus period for each entry of `periods_list`, other grating
/// parameters taken from `template`.
pub fn reflectivity_sweep(
    template: &GratingStack,
    period_range: &[f64],
    periods_list: &[f64],
    wavelength_nm: f64,
) -> Result<Vec<SweepCurve>, DbrError> {
    let (duty, n_lo, n_hi, surround) = (template.duty, template.n_lo, template.n_hi, template.surround);
    let curve = |&np: &f64| -> Result<SweepCurve, DbrError> {
        let mut spectrum = Spectrum { axis: vec![], r: vec![], t: vec![] };
        for &p in period_range {
            let rt = transfer_matrix(&build_grating(p, duty, np, n_lo, n_hi, surround)?, wavelength_nm);
            spectrum.axis.push(p);
            spectrum.r.push(rt.r);
            spectrum.t.push(rt.t);
        }
        let (mut best, mut r_max) = (f64::NAN, f64::NEG_INFINITY);
        for (p, r) in spectrum.axis.iter().zip(&spectrum.r) {
            if *r > r_max {
                r_max = *r;
                best = *p;
            }
        }
        Ok(SweepCurve { periods: np, spectrum, argmax_period: best, r_max })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        periods_list.par_iter().map(curve).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        periods_list.iter().map(curve).collect()
    }
}

/// Least-squares slope of `log10(1 - R)` against `N_p` (decades per period).
pub fn log_linear_slope(periods: &[f64], transmission: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        periods.iter().zip(transmission).filter(|(_, t)| **t > 0.0).map(|(n, t)| (*n, t.log10())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Fundamental quasi-TE effective indices `(n_lo, n_hi)` of the slot and solid sections.
pub fn effective_section_indices(slot_map: &IndexMap, solid_map: &IndexMap, wavelength_nm: f64) -> Result<(f64, f64), DbrError> {
    let fundamental = |map: &IndexMap| -> Result<f64, DbrError> {
        let modes = solve_te_modes(map, &SolveRequest::guided(1, wavelength_nm, map))?;
        Ok(modes.first().map(|m| m.n_eff).unwrap_or(map.n_cl))
    };
    Ok((fundamental(slot_map)?, fundamental(solid_map)?))
}
