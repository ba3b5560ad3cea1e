use thiserror::Error;

/// Errors raised by the simulation, optimization and diagnostics routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("width mismatch: expected {expected} qubits, got {got}")]
    WidthMismatch { expected: usize, got: usize },

    #[error("qubit {index} is out of range for a {n}-qubit register")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot draw {requested} distinct off-diagonal strings on {n} qubits (only {available} exist)")]
    TooManyStrings { requested: usize, n: usize, available: u128 },

    #[error("linear solve did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("{what} is limited to n <= {cap} qubits, got {n}")]
    SizeCap { what: &'static str, n: usize, cap: usize },

    #[error("commuting basis construction failed after {0} attempts")]
    BasisConstruction(usize),

    #[error("phase fit stagnated at error {error:e} above tolerance {tol:e}")]
    FitStagnated { error: f64, tol: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
