use thiserror::Error;

/// Errors raised across the library. Each variant maps onto one CLI exit class.
#[derive(Debug, Error)]
pub enum Error {
    /// A point, vector or argument fell outside the domain an operation requires.
    #[error("domain error: {0}")]
    Domain(String),
    /// An index (round, digit, level) was outside its valid range.
    #[error("bounds error: {0}")]
    Bounds(String),
    /// Invalid run or algorithm parameters.
    #[error("config error: {0}")]
    Config(String),
    /// The forecast/observe protocol was violated.
    #[error("protocol error: {0}")]
    Protocol(String),
    /// The requested combination is not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn bounds(msg: impl Into<String>) -> Self {
        Error::Bounds(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }
}
