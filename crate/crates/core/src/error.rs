use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Burgers limit solution is undefined: `2 * int_1^x f + 1 <= 0` somewhere.
    #[error("forcing violates the limit-solution condition at x = {x}: radicand {radicand}")]
    DataConditionViolation { x: f64, radicand: f64 },

    /// Boundary-layer amplitude `1 + u0(0)` vanishes, so the normalized corrector is undefined.
    #[error("degenerate corrector: |1 + u0(0)| = {0:e}")]
    DegenerateCorrector(f64),

    #[error("Newton iteration failed to reduce the residual at iteration {iteration} (residual {residual:e})")]
    NewtonDivergence { iteration: usize, residual: f64 },

    #[error("reference mesh too coarse: M = {0} (need at least 64)")]
    MeshTooCoarse(usize),

    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("truth has zero L2 norm")]
    ZeroTruthNorm,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
