//! Crate-wide error type and exit-code mapping.

use std::path::PathBuf;
use thiserror::Error;

/// Unified error type for every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller handed us something structurally unusable (bad parameter,
    /// inconsistent shapes, out-of-range qubit index, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A file existed but its contents do not match the schema we expect
    /// (wrong version, malformed record, missing field).
    #[error("schema error: {0}")]
    Schema(String),

    /// Plain I/O failure, annotated with the path involved.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Numerical breakdown: NaN/Inf appeared, a gradient check failed,
    /// an optimizer diverged, a metric hit an undefined case.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// 0 is success (never produced by an `Error`), 2 is a usage error,
    /// 3 a schema or I/O failure, 4 a numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Schema(_) | Error::Io { .. } => 3,
            Error::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
