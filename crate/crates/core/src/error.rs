use thiserror::Error;

use crate::grid::Space;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    #[error("malformed rational {0:?}")]
    MalformedRational(String),

    #[error("expected a field in {expected} space, got {found}")]
    SpaceMismatch { expected: Space, found: Space },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("blow-up detected at t = {time}")]
    BlowUp { time: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
