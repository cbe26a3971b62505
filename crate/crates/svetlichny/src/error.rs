//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("missing counts for {0} setting triple(s), e.g. {1}")]
    MissingCounts(usize, String),

    #[error("zero total count in correlation block {0}")]
    ZeroTotal(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("post-selection removed every term (probability 0)")]
    EmptyPostSelection,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
