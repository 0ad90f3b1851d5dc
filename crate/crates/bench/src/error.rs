use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] falqon::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("unknown method id `{0}`")]
    UnknownMethod(String),

    #[error("invalid plan: {0}")]
    InvalidPlan(String),

    #[error("the store at {0} already holds results; pass --resume to continue it")]
    StoreExists(PathBuf),

    #[error("the store at {path} was written for a different plan ({field} differs)")]
    PlanMismatch { path: PathBuf, field: String },

    #[error("unpaired cells for {method_a} vs {method_b}: {missing}")]
    Pairing {
        method_a: String,
        method_b: String,
        missing: String,
    },

    #[error("the store has no records")]
    EmptyStore,

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> BenchError {
    let path = path.into();
    move |source| BenchError::Io { path, source }
}
