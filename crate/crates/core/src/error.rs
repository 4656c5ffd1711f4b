use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Adaptive quadrature exhausted its refinement budget.
    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    Numerical { estimate: f64, error_bound: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Running any server costs more than it can possibly earn.
    #[error("degenerate economics: alpha = {alpha} >= 1, run zero servers")]
    DegenerateEconomics { alpha: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
