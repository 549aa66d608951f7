//! Physical constants and unit conversions.
//!
//! Lengths enter in nanometres (geometry, wavelengths) or micrometres (cavity
//! and grating lengths); rates leave in rad/s.

/// Speed of light (m/s).
pub const C: f64 = 2.997_924_58e8;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Speed of light (um/s).
pub const C_UM_PER_S: f64 = C * 1e6;

/// Free-space wavenumber `2 pi / lambda` in rad/nm.
pub fn wavenumber_per_nm(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI / wavelength_nm
}

/// Free-space wavenumber in rad/um.
pub fn wavenumber_per_um(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI / (wavelength_nm * 1e-3)
}

/// Propagation constant `n_eff k` in rad/um.
pub fn beta_per_um(n_eff: f64, wavelength_nm: f64) -> f64 {
    n_eff * wavenumber_per_um(wavelength_nm)
}
