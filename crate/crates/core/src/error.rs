use thiserror::Error;

/// Errors raised while building spaces, evaluating metrics or running checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the domain of plot {plot}")]
    Domain { plot: usize, point: Vec<f64> },

    #[error("finite-difference stencil at {point:?} (step {step}) leaves the chart domain")]
    Boundary { point: Vec<f64>, step: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("no local factorization of plot {plot} at {point:?}")]
    Factorization { plot: usize, point: Vec<f64> },

    #[error("pullback undefined on plot {plot} at {point:?}: {reason}")]
    Pullback {
        plot: usize,
        point: Vec<f64>,
        reason: String,
    },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("evaluation error at angle {theta}: {reason}")]
    Evaluation { theta: f64, reason: String },

    #[error("malformed space description at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
