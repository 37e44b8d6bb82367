use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum ReconError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("node ceiling of {0} exceeded while sampling a tree")]
    NodeCeiling(usize),
    #[error("inconsistent boundary: every colour is excluded")]
    InconsistentBoundary,
    #[error("dominance check failed: {0}")]
    NotDominated(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ReconError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ReconError::InvalidParameter(msg.into()))
}
