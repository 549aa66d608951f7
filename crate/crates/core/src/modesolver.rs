//! Guided quasi-TE eigenmodes of a dielectric cross-section.
//!
//! The transverse fields `(E_x, E_y)` live on a Yee grid: `E_x` on the index
//! map nodes, `E_y` between nodes in both directions. Eliminating the magnetic
//! field gives `Omega e = -n_eff^2 e` with `Omega = P Q`, derivatives scaled by
//! `1/k0`. Domain walls are perfect electric conductors.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::eigen::{shift_invert_eigs, EigOptions};
use crate::error::SolverError;
use crate::geometry::{Grid, IndexMap};
use crate::sparse::Csr;
use crate::units::{beta_per_um, wavenumber_per_nm};

/// Modes whose `E_x` carries less than this share of the transverse energy
/// are treated as quasi-TM and dropped.
pub const TE_FRACTION_MIN: f64 = 0.5;

/// Two modes closer than this in `n_eff` are reported as a degenerate pair.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveRequest {
    pub num_modes: usize,
    /// Only modes with `min < n_eff <= max` are returned.
    pub n_eff_window: (f64, f64),
    /// Free-space wavelength (nm).
    pub wavelength: f64,
}

impl SolveRequest {
    /// Guided modes only: the window spans cladding to the densest material.
    pub fn guided(num_modes: usize, wavelength: f64, map: &IndexMap) -> Self {
        Self { num_modes, n_eff_window: (map.n_cl, map.n_max), wavelength }
    }

    fn validate(&self, map: &IndexMap) -> Result<(), SolverError> {
        if self.num_modes == 0 {
            return Err(SolverError::InvalidRequest("num_modes must be at least 1".into()));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(SolverError::InvalidRequest(format!("wavelength must be positive, got {}", self.wavelength)));
        }
        let (lo, hi) = self.n_eff_window;
        if !(lo >= 1.0 - 1e-12 && hi >= lo && lo <= map.n_max + 1e-12) {
            return Err(SolverError::InvalidRequest(format!(
                "n_eff window ({lo}, {hi}) must lie within [1, {}]",
                map.n_max
            )));
        }
        Ok(())
    }
}

/// One quasi-TE eigenmode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    pub n_eff: f64,
    /// Propagation constant (rad/um).
    pub beta: f64,
    /// Free-space wavelength (nm).
    pub wavelength: f64,
    pub guided: bool,
    pub grid: Grid,
    /// `E_x` on the grid nodes, `nx * ny`, unit peak magnitude.
    pub field: Vec<f64>,
    /// Share of the transverse electric energy carried by `E_x`.
    pub te_fraction: f64,
    /// `|Omega e - lambda e| / |e|`, i.e. the operator residual in units of `k0^2`.
    pub residual: f64,
    /// Set when another returned mode shares this `n_eff` to within [`DEGENERACY_TOL`].
    pub degenerate: bool,
}

impl ModeSolution {
    pub fn summary(&self) -> ModeSummary {
        ModeSummary {
            n_eff: self.n_eff,
            beta_rad_per_um: self.beta,
            wavelength_nm: self.wavelength,
            guided: self.guided,
            te_fraction: self.te_fraction,
            residual: self.residual,
            degenerate: self.degenerate,
            nx: self.grid.nx,
            ny: self.grid.ny,
            dx_nm: self.grid.dx,
            dy_nm: self.grid.dy,
        }
    }

    /// CSV dump with header `x_um,y_um,Ex`.
    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut out = String::from("x_um,y_um,Ex\n");
        for i in 0..g.nx {
            for j in 0..g.ny {
                let _ = writeln!(out, "{},{},{}", g.x(i) * 1e-3, g.y(j) * 1e-3, self.field[g.idx(i, j)]);
            }
        }
        out
    }

    pub fn peak(&self) -> f64 {
        self.field.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub n_eff: f64,
    pub beta_rad_per_um: f64,
    pub wavelength_nm: f64,
    pub guided: bool,
    pub te_fraction: f64,
    pub residual: f64,
    pub degenerate: bool,
    pub nx: usize,
    pub ny: usize,
    pub dx_nm: f64,
    pub dy_nm: f64,
}

/// Bilinear interpolation of `E_x` at `(x, y)` nm.
pub fn field_at(mode: &ModeSolution, x: f64, y: f64) -> Result<f64, SolverError> {
    mode.grid.interpolate(&mode.field, x, y).ok_or(SolverError::OutOfDomain { x, y })
}

/// `out[a] = in[a + hi] - in[a + lo]`, dropping out-of-range taps, scaled by `s`.
fn difference(nout: usize, nin: usize, lo: isize, hi: isize, s: f64) -> Csr {
    let mut e = Vec::with_capacity(2 * nout);
    for a in 0..nout as isize {
        for (off, sign) in [(hi, s), (lo, -s)] {
            let b = a + off;
            if b >= 0 && (b as usize) < nin {
                e.push((a as usize, b as usize, sign));
            }
        }
    }
    Csr::from_triplets(nout, nin, e)
}

/// The discretized full-vector operator of one cross-section.
pub(crate) struct Operator {
    pub omega: Csr,
    /// Number of `E_x` unknowns; they come first in the field vector.
    pub n_ex: usize,
    pub nx: usize,
    pub ny: usize,
}

impl Operator {
    pub fn new(map: &IndexMap, wavelength: f64) -> Self {
        let g = map.grid;
        let (nx, ny) = (g.nx, g.ny);
        let nyi = ny - 2;
        let k0 = wavenumber_per_nm(wavelength);
        let (sx, sy) = (1.0 / (g.dx * k0), 1.0 / (g.dy * k0));

        // 1D stencils between node and half-node positions
        let bound_to_node = difference(nx, nx - 1, -1, 0, sx);
        let node_to_bound = difference(nx - 1, nx, 0, 1, sx);
        let half_to_node = difference(nyi, ny - 1, 0, 1, sy);
        let node_to_half = difference(ny - 1, nyi, -1, 0, sy);
        let id = Csr::identity;

        let ax = Csr::kron(&bound_to_node, &id(nyi));
        let ay = Csr::kron(&id(nx - 1), &node_to_half);
        let bx = Csr::kron(&node_to_bound, &id(nyi));
        let by = Csr::kron(&id(nx - 1), &half_to_node);
        let cx = Csr::kron(&bound_to_node, &id(ny - 1));
        let cy = Csr::kron(&id(nx), &node_to_half);
        let dx = Csr::kron(&node_to_bound, &id(ny - 1));
        let dy = Csr::kron(&id(nx), &half_to_node);

        let exx: Vec<f64> = (0..nx).flat_map(|i| (1..ny - 1).map(move |j| (i, j))).map(|(i, j)| map.eps_at(i, j)).collect();
        let inv_ezz: Vec<f64> = map.eps_z.iter().map(|e| 1.0 / e).collect();
        let n_ex = nx * nyi;
        let n_ey = (nx - 1) * (ny - 1);

        let ax_iz = ax.matmul(&Csr::diag(&inv_ezz));
        let ay_iz = ay.matmul(&Csr::diag(&inv_ezz));
        let p = Csr::block2(
            &ax_iz.matmul(&by),
            &ax_iz.matmul(&bx).add(&id(n_ex)).scale(-1.0),
            &ay_iz.matmul(&by).add(&id(n_ey)),
            &ay_iz.matmul(&bx).scale(-1.0),
        );
        let q = Csr::block2(
            &dx.matmul(&cy),
            &dx.matmul(&cx).add(&Csr::diag(&map.eps_y)).scale(-1.0),
            &dy.matmul(&cy).add(&Csr::diag(&exx)),
            &dy.matmul(&cx).scale(-1.0),
        );
        Self { omega: p.matmul(&q), n_ex, nx, ny }
    }

    /// Scatters the `E_x` part of a field vector onto the full node grid.
    fn ex_on_nodes(&self, v: &[f64]) -> Vec<f64> {
        let nyi = self.ny - 2;
        let mut out = vec![0.0; self.nx * self.ny];
        for i in 0..self.nx {
            for jj in 0..nyi {
                out[i * self.ny + jj + 1] = v[i * nyi + jj];
            }
        }
        out
    }
}

/// Finds the guided quasi-TE modes of `map`, sorted by `n_eff` descending.
///
/// Returns an empty list when the structure guides nothing inside the window.
pub fn solve_te_modes(map: &IndexMap, req: &SolveRequest) -> Result<Vec<ModeSolution>, SolverError> {
    req.validate(map)?;
    if map.n_max <= map.n_cl + 1e-12 {
        return Ok(vec![]);
    }
    let op = Operator::new(map, req.wavelength);
    let n = op.omega.nrows;
    let sigma = -map.n_max * map.n_max;
    let (lo, hi) = req.n_eff_window;

    let mut nev = 2 * req.num_modes + 2;
    loop {
        let pairs = shift_invert_eigs(&op.omega, sigma, EigOptions { nev: nev.min(n), ..Default::default() })?;
        let mut modes = Vec::new();
        let mut exhausted = pairs.values.len() < nev;
        for (lambda, v) in pairs.values.iter().zip(&pairs.vectors) {
            if *lambda >= 0.0 {
                exhausted = true;
                continue;
            }
            let n_eff = (-lambda).sqrt();
            if n_eff <= lo {
                exhausted = true;
                continue;
            }
            if n_eff > hi + 1e-12 {
                continue;
            }
            let ex_energy: f64 = v[..op.n_ex].iter().map(|x| x * x).sum();
            let te_fraction = ex_energy / v.iter().map(|x| x * x).sum::<f64>();
            if te_fraction < TE_FRACTION_MIN {
                continue;
            }
            let ov = op.omega.mul_vec(v);
            let residual = ov.iter().zip(v).map(|(a, x)| (a - lambda * x).powi(2)).sum::<f64>().sqrt()
                / v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut field = op.ex_on_nodes(v);
            normalize_sign(&mut field, &map.grid, &map.slot_centers);
            modes.push(ModeSolution {
                n_eff,
                beta: beta_per_um(n_eff, req.wavelength),
                wavelength: req.wavelength,
                guided: n_eff > map.n_cl,
                grid: map.grid,
                field,
                te_fraction,
                residual,
                degenerate: false,
            });
        }
        if modes.len() >= req.num_modes || exhausted || nev >= n || nev >= 8 * req.num_modes + 8 {
            modes.sort_by(|a, b| b.n_eff.total_cmp(&a.n_eff));
            modes.truncate(req.num_modes);
            for k in 1..modes.len() {
                if (modes[k - 1].n_eff - modes[k].n_eff).abs() < DEGENERACY_TOL {
                    modes[k - 1].degenerate = true;
                    modes[k].degenerate = true;
                }
            }
            return Ok(modes);
        }
        nev *= 2;
    }
}

/// Scales to unit peak magnitude and makes the field positive at the first
/// slot centre (left to right) where it is not negligible.
fn normalize_sign(field: &mut [f64], grid: &Grid, slot_centers: &[f64]) {
    let peak = field.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if peak == 0.0 {
        return;
    }
    let mut sign = 1.0;
    for &xc in slot_centers {
        if let Some(v) = grid.interpolate(field, xc, 0.0) {
            if v.abs() >= 1e-9 * peak {
                sign = v.signum();
                break;
            }
        }
    }
    let s = sign / peak;
    field.iter_mut().for_each(|v| *v *= s);
}

/// Effective indices of the TE modes of a symmetric slab, descending.
///
/// `thickness` and `wavelength` share a unit. Each root of the even and odd
/// dispersion relations is bracketed and bisected to `1e-10` in `n_eff`.
pub fn slab_mode_oracle(n_core: f64, n_clad: f64, thickness: f64, wavelength: f64) -> Vec<f64> {
    if n_core <= n_clad {
        return vec![];
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let v = k * thickness / 2.0 * (n_core * n_core - n_clad * n_clad).sqrt();
    // u = kappa t / 2 in [0, V]; even: u tan u = w, odd: -u cot u = w, w = sqrt(V^2 - u^2)
    let to_neff = |u: f64| {
        let kappa = 2.0 * u / thickness;
        (n_core * n_core - (kappa / k).powi(2)).sqrt()
    };
    let mut out = Vec::new();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut m = 0usize;
    while (m as f64) * half_pi < v {
        let a = m as f64 * half_pi;
        let b = ((m + 1) as f64 * half_pi).min(v);
        let f = |u: f64| {
            let w = (v * v - u * u).max(0.0).sqrt();
            if m % 2 == 0 {
                u * u.sin() - w * u.cos()
            } else {
                -u * u.cos() - w * u.sin()
            }
        };
        let (mut lo, mut hi) = (a, b);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            out.push(to_neff(lo));
        } else if flo * fhi <= 0.0 {
            while to_neff(lo) - to_neff(hi) > 1e-11 {
                let mid = 0.5 * (lo + hi);
                if f(mid) * flo > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let n = to_neff(0.5 * (lo + hi));
            if n > n_clad {
                out.push(n);
            }
        }
        m += 1;
    }
    out
}
