use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite amplitude at pixel {0}")]
    NonFinite(usize),
    #[error("field is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("step {index} ({kind}): {reason}")]
    InvalidStep {
        index: usize,
        kind: String,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("malformed dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
