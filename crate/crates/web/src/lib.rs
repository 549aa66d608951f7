//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Only the closed-form parts of the library are exposed: the mode solver is
//! too heavy for an interactive page, so section indices are user inputs.
//! Every export returns a JSON string.

use serde_json::json;
use wasm_bindgen::prelude::*;

use slotcav::cmt::{analyze_tight_binding, CouplingMatrix};
use slotcav::dbr::{build_grating, reflectivity_sweep};
use slotcav::design::{grating_point, solve_periods};

fn to_js<T: std::fmt::Display>(e: T) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Reflection against grating period (nm) for one period count.
pub fn spectrum_json(
    n_lo: f64,
    n_hi: f64,
    periods: f64,
    p_start: f64,
    p_stop: f64,
    p_step: f64,
    wavelength: f64,
) -> Result<String, String> {
    if !(p_step > 0.0 && p_stop >= p_start) {
        return Err("need p_start <= p_stop and p_step > 0".into());
    }
    let n = ((p_stop - p_start) / p_step + 1e-9).floor() as usize;
    if n > 20_000 {
        return Err("too many sweep points".into());
    }
    let axis: Vec<f64> = (0..=n).map(|k| p_start + k as f64 * p_step).collect();
    let template = build_grating(axis[0], 0.5, periods, n_lo, n_hi, n_lo).map_err(|e| e.to_string())?;
    let curve = reflectivity_sweep(&template, &axis, &[periods], wavelength).map_err(|e| e.to_string())?.remove(0);
    Ok(json!({
        "period_nm": curve.spectrum.axis,
        "r": curve.spectrum.r,
        "argmax_period_nm": curve.argmax_period,
        "r_max": curve.r_max,
    })
    .to_string())
}

/// End-to-end hopping through a grating of `periods` periods, plus the period
/// count needed for `target` rad/s (`target <= 0` skips the inversion).
pub fn end_to_end_json(
    n_lo: f64,
    n_hi: f64,
    periods: f64,
    period: f64,
    wavelength: f64,
    target: f64,
) -> Result<String, String> {
    let point = grating_point(periods, period, n_lo, n_hi, 0.0, wavelength).map_err(|e| e.to_string())?;
    let inverse = if target > 0.0 {
        match solve_periods(target, period, n_lo, n_hi, 0.0, wavelength) {
            Ok(s) => json!({ "periods": s.point.periods, "j_e": s.point.j_e, "bound": s.bound }),
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        serde_json::Value::Null
    };
    Ok(json!({ "point": point, "inverse": inverse }).to_string())
}

/// Tight-binding report of a pasted square matrix.
pub fn tight_binding_json(matrix: &str, beta_ref: f64) -> Result<String, String> {
    let m = CouplingMatrix::parse(matrix, beta_ref).map_err(|e| e.to_string())?;
    let report = analyze_tight_binding(&m).map_err(|e| e.to_string())?;
    Ok(json!({ "size": m.size(), "relative": m.relative(), "report": report }).to_string())
}

#[wasm_bindgen]
pub fn dbr_spectrum(
    n_lo: f64,
    n_hi: f64,
    periods: f64,
    p_start: f64,
    p_stop: f64,
    p_step: f64,
    wavelength: f64,
) -> Result<String, JsValue> {
    spectrum_json(n_lo, n_hi, periods, p_start, p_stop, p_step, wavelength).map_err(to_js)
}

#[wasm_bindgen]
pub fn end_to_end(n_lo: f64, n_hi: f64, periods: f64, period: f64, wavelength: f64, target: f64) -> Result<String, JsValue> {
    end_to_end_json(n_lo, n_hi, periods, period, wavelength, target).map_err(to_js)
}

#[wasm_bindgen]
pub fn tight_binding(matrix: &str, beta_ref: f64) -> Result<String, JsValue> {
    tight_binding_json(matrix, beta_ref).map_err(to_js)
}
