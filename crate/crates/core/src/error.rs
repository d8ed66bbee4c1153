use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible with the requested operation.
    #[error("shape error: {0}")]
    Shape(String),

    /// A model or run configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated an operation precondition (empty input, single class, ...).
    #[error("contract error: {0}")]
    Contract(String),

    /// CSV header or manifest does not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell could not be parsed.
    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// Wraps an error raised while processing one fold of a cross-validation run.
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    /// Wraps an error raised while evaluating one cell of an ablation grid.
    #[error("cell ({variant}, {category}): {source}")]
    Cell {
        variant: String,
        category: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True if the root cause is an I/O failure.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Fold { source, .. } | Error::Cell { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
