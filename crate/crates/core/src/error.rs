use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LamaError {
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    Index { index: usize, len: usize },

    #[error("at least {required} nodes are required, grid has {found}")]
    InsufficientNodes { required: usize, found: usize },

    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("parse error at row {row}: {reason}")]
    Parse { row: usize, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl LamaError {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        LamaError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LamaError>;
