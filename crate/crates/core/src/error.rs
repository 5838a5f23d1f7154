use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution, model or experiment specification is malformed.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// The law described by a specification has zero variance.
    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    /// A hypothesis required by a bound or check does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The requested quantity does not exist for this law.
    #[error("not available: {0}")]
    Unavailable(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
