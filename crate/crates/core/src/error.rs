use std::io;

use thiserror::Error;

/// Errors produced by matrix construction, parsing and the SpMM kernels.
#[derive(Debug, Error)]
pub enum SpmmError {
    #[error("triple #{index} ({row}, {col}) lies outside a {num_rows}x{num_cols} matrix")]
    TripleOutOfRange {
        index: usize,
        row: usize,
        col: usize,
        num_rows: usize,
        num_cols: usize,
    },

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported dense layout: {0}")]
    Layout(String),

    #[error("lane-group contract violated: {0}")]
    Contract(String),

    #[error("trace contains no memory transactions")]
    EmptyTrace,

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = SpmmError> = std::result::Result<T, E>;

impl SpmmError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        SpmmError::Parse {
            line,
            message: message.into(),
        }
    }
}
