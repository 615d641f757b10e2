use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// The input data violates a precondition (bad target, too few rows, ...).
    #[error("data error: {0}")]
    Data(String),

    /// Column names or kinds differ from the ones seen at fit time.
    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("tuning budget exhausted ({0} evaluations)")]
    BudgetExhausted(usize),

    #[error("unsupported bundle version {found} (this build reads up to {supported})")]
    Version { found: u32, supported: u32 },

    #[error("bundle checksum mismatch")]
    Checksum,

    #[error("malformed bundle: {0}")]
    Bundle(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
