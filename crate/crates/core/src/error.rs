//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments or data (empty sets, dimension mismatches, bad specs).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The instance is outside the regime an exact method supports;
    /// callers fall back to an approximate route.
    #[error("unsupported instance: {0}")]
    UnsupportedInstance(String),

    /// Aspect ratio is undefined (fewer than two points, or min distance zero).
    #[error("undefined aspect ratio: {0}")]
    UndefinedRatio(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::UnsupportedInstance(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
