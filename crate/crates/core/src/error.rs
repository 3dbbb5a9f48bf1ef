use std::path::PathBuf;

use thiserror::Error;

/// Failures while reading an `ANISOFIELD` file.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("field file is empty")]
    Empty,
    #[error("malformed header at line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed value at line {line}: {text:?}")]
    MalformedValue { line: usize, text: String },
    #[error("non-finite value at line {line}")]
    NonFinite { line: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("operation undefined at the zero function: {0}")]
    ZeroField(&'static str),
    #[error("window M = {window} too small on axis {axis}: need M >= {required}")]
    WindowTooSmall { axis: usize, window: usize, required: usize },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("not supported: {0}")]
    Unsupported(String),
    #[error("parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
