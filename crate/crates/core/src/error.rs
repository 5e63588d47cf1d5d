use thiserror::Error;

/// Errors raised by the geometric-tomography routines.
#[derive(Debug, Error)]
pub enum GeoError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported body: {0}")]
    UnsupportedBody(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("no convergence: {what} (residual {residual:e}, tolerance {tol:e})")]
    NoConvergence {
        what: String,
        residual: f64,
        tol: f64,
    },

    #[error("function is not even: odd-degree coefficient of size {magnitude:e}")]
    NotEven { magnitude: f64 },

    #[error("not an intersection body: g = {margin:e} at direction {witness:?}")]
    NotAnIntersectionBody { margin: f64, witness: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GeoError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GeoError::InvalidParameter(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        GeoError::UnsupportedBody(msg.into())
    }

    /// Short machine-readable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            GeoError::InvalidParameter(_) => "invalid-parameter",
            GeoError::DimensionMismatch { .. } => "dimension-mismatch",
            GeoError::UnsupportedBody(_) => "unsupported-body",
            GeoError::Parse { .. } => "parse-error",
            GeoError::NoConvergence { .. } => "no-convergence",
            GeoError::NotEven { .. } => "not-even",
            GeoError::NotAnIntersectionBody { .. } => "not-an-intersection-body",
            GeoError::Io(_) => "io-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, GeoError>;
