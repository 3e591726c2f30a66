use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    /// A corpus or data invariant does not hold. `rule` names the invariant.
    #[error("validation error ({rule}): {detail}")]
    Validation { rule: &'static str, detail: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("signal too short: {len} samples, need at least {min}")]
    Length { len: usize, min: usize },

    #[error("out of range: {0}")]
    Range(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("no fixations: {0}")]
    NoFixations(String),

    #[error("missing data: {0}")]
    Data(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown {kind} '{name}'; valid values: {}", valid.join(", "))]
    UnknownName {
        kind: &'static str,
        name: String,
        valid: Vec<String>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("training set contains a single class")]
    SingleClass,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(rule: &'static str, detail: impl Into<String>) -> Self {
        Error::Validation {
            rule,
            detail: detail.into(),
        }
    }

    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::Parameter(_) => "parameter",
            Error::Length { .. } => "length",
            Error::Range(_) => "range",
            Error::Numeric(_) => "numeric",
            Error::NoFixations(_) => "no_fixations",
            Error::Data(_) => "data",
            Error::Unsupported(_) => "unsupported",
            Error::UnknownName { .. } => "unknown_name",
            Error::Dimension { .. } => "dimension",
            Error::SingleClass => "single_class",
            Error::Empty(_) => "empty",
            Error::Insufficient(_) => "insufficient",
            Error::Serde(_) => "serde",
        }
    }
}
