use thiserror::Error;

/// Errors raised by the library. Each variant names the class of failure so
/// the CLI can map it to an exit status.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("unknown node {0}")]
    UnknownNode(i64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
