//! Error types shared across the crate.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated (bad dimension, out of
    /// range index, non-finite value, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cholesky factorization failed at every jitter level tried.
    #[error("cholesky factorization failed; jitter levels tried: {attempted_jitter:?}")]
    CholeskyFailed { attempted_jitter: Vec<f64> },

    /// Every optimization restart failed numerically.
    #[error("all {} restarts failed: {}", reasons.len(), reasons.join("; "))]
    AllRestartsFailed { reasons: Vec<String> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A cell that should hold a number does not. Row and column are
    /// 1-based positions in the file, counting the header row if present.
    #[error("{path}: row {row}, column {column}: expected a number, found {value:?}")]
    NonNumericCell {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: no data rows")]
    EmptyTable { path: PathBuf },

    #[error("{path}: no column named or numbered {target:?}")]
    UnknownTargetColumn { path: PathBuf, target: String },

    /// Standardization cannot scale a constant column.
    #[error("column {column:?} is constant and cannot be standardized")]
    ConstantColumn { column: String },

    /// A persisted model failed to parse or verify.
    #[error("model load failed: {0}")]
    ModelLoad(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
