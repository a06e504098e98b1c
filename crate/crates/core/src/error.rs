use crate::fitting::FitResult;
use crate::rootfind::Bracket;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-finite {what}: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("slope m is zero; the curve cannot be inverted")]
    SingularSlope,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("subprocess decomposition needs a > 0 (got a = {0})")]
    DecompositionUndefined(f64),

    #[error("function is not finite at grid node {node} (x = {x})")]
    Scan { node: usize, x: f64 },

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: &'static str },

    #[error("root finder did not converge in {iterations} iterations (best x = {best})")]
    NoConvergence { best: f64, iterations: usize },

    #[error("expected exactly one inflection in range, found {}: {brackets:?}", brackets.len())]
    AmbiguousInflection { brackets: Vec<Bracket> },

    #[error("curvature extrema not inside range: found {left} root(s) left and {right} right of x0")]
    ExtremaNotInData { left: usize, right: usize },

    #[error("|y - y0| = {delta:e} at x = {x} is too small to resolve a0")]
    SingularInterval { x: f64, delta: f64 },

    #[error("maximum permeability m0 is zero")]
    ZeroPermeability,

    #[error("branches must cross exactly twice, found {} crossing(s)", crossings.len())]
    Topology { crossings: Vec<Bracket> },

    #[error("branch {branch} is not monotone non-decreasing near x = {x}")]
    NotMonotone { branch: &'static str, x: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("center selection: {0}")]
    Selection(String),

    #[error("fit failed: {reason}")]
    FitFailed { reason: String, best: Box<FitResult> },

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
