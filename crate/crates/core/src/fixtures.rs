//! Bundled model files: the fitted ferrite loop branches and the
//! representative loop parameters.

use serde::Deserialize;

use crate::superposition::Superposition;

pub const FERRITE_UPPER_JSON: &str = include_str!("../fixtures/ferrite_upper.json");
pub const FERRITE_LOWER_JSON: &str = include_str!("../fixtures/ferrite_lower.json");
pub const REPRESENTATIVE_LOOP_JSON: &str = include_str!("../fixtures/representative_loop.json");

/// Parameters of a two-parameter loop: shared `(a, m)` and two centers.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, serde::Serialize)]
pub struct LoopParams {
    pub a: f64,
    pub m: f64,
    pub upper_center: (f64, f64),
    pub lower_center: (f64, f64),
}

pub fn ferrite_upper() -> Superposition {
    Superposition::from_json(FERRITE_UPPER_JSON).expect("bundled fixture parses")
}

pub fn ferrite_lower() -> Superposition {
    Superposition::from_json(FERRITE_LOWER_JSON).expect("bundled fixture parses")
}

pub fn representative_params() -> LoopParams {
    serde_json::from_str(REPRESENTATIVE_LOOP_JSON).expect("bundled fixture parses")
}
