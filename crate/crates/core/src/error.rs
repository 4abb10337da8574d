use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge (last estimate {estimate})")]
    NonConvergent { estimate: f64 },

    #[error("root finder did not converge: {0}")]
    RootNotFound(String),

    #[error("cube family is empty")]
    EmptyFamily,

    #[error("no cube of the family contains the point")]
    NoContainingCube,

    #[error("degenerate integral: {0}")]
    Degenerate(String),

    #[error("weight is not defined at the origin")]
    Origin,

    #[error("cannot parse {0}")]
    Parse(String),

    #[error("report bundle is empty")]
    EmptyBundle,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
