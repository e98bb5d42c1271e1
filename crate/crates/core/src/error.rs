use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid feature vector: {0}")]
    InvalidFeature(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("dataset is empty after cleansing")]
    EmptyDataset,

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("unsupported solver '{0}' (only 'gd' is implemented)")]
    UnsupportedSolver(String),

    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    #[error("window {window_id}: training data contains a single class")]
    SingleClassWindow { window_id: usize },

    #[error("no evaluable results")]
    EmptyResult,

    #[error("invalid state: {0}")]
    State(String),

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("window {window_id}: {source}")]
    Window {
        window_id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(expected: usize, actual: usize) -> Self {
        Error::Dimension { expected, actual }
    }
}
