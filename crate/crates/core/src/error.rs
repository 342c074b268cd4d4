use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by dataset handling, training and the experiment harness.
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
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` has a single distinct value after filtering")]
    ConstantColumn(String),
    #[error("column `{column}` row {row}: cannot parse `{value}` as a number")]
    BadNumber { column: String, row: usize, value: String },
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dataset too small: {0}")]
    TooSmall(String),
    #[error("empty subset: {0}")]
    EmptySubset(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("solver failed for every candidate: {0}")]
    SolverFailure(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("malformed model file: {0}")]
    ModelFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
