//! JSON reports. Derived quantities are rounded to 9 significant digits;
//! models are written at full precision so that reloading them reproduces
//! every evaluation exactly.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fitting::FitResult;
use crate::superposition::Superposition;

/// Rounds to 9 significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

pub fn model_value(model: &Superposition) -> Value {
    serde_json::to_value(model).expect("model serializes")
}

/// `{"model": .., "rms_residual": .., "iterations": .., "converged": ..}`.
pub fn fit_report(fit: &FitResult) -> Value {
    json!({
        "model": model_value(&fit.model),
        "rms_residual": sig9(fit.rms_residual),
        "iterations": fit.iterations,
        "converged": fit.converged,
    })
}

/// Reads a model written either bare or wrapped in a fit report.
pub fn load_model(text: &str) -> Result<Superposition> {
    let v: Value = serde_json::from_str(text)?;
    let inner = match v.get("model") {
        Some(m) => m.clone(),
        None => v,
    };
    serde_json::from_value(inner).map_err(|e| Error::InvalidModel(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}
