use thiserror::Error;

/// Errors raised by the classifiers, clustering and harness layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar or vector entry outside the admissible domain (negative, NaN, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched vector or matrix dimensions.
    #[error("shape error: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    /// A class holds fewer points than the operation requires.
    #[error("insufficient sample: class {class} has {found} points, need at least {needed}")]
    InsufficientSample {
        class: usize,
        needed: usize,
        found: usize,
    },

    /// Contradictory or invalid configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input data.
    #[error("ingest error: {0}")]
    Ingest(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Config(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
