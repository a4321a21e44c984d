use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow: {0}")]
    Overflow(String),

    /// A computation produced a non-finite or otherwise unusable value.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("posterior truncation did not reach tolerance {tol:e} within {terms} terms")]
    Truncation { tol: f64, terms: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("boundary outside grid: {0}")]
    BoundaryOutsideGrid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
