use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

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

    #[error("input is empty: {0}")]
    EmptyInput(String),

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column `{column}`: {message}")]
    BadValue {
        row: usize,
        column: String,
        message: String,
    },

    #[error("unknown class `{0}`")]
    UnknownClass(String),

    #[error("patterns overlap on feature {0}")]
    OverlappingPatterns(u32),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("confidence undefined: pattern has zero estimated frequency in every class")]
    ConfidenceUndefined,

    #[error("frequency undefined: no chain contributes to the likelihood")]
    FrequencyUndefined,

    #[error("priority queue is empty")]
    EmptyQueue,

    #[error("tail node of order {order} exceeds the enumeration ceiling of {limit}; use queue mode")]
    TailTooLarge { order: usize, limit: usize },

    #[error("scale guard exceeded: {0}")]
    ScaleGuard(String),

    #[error("malformed chain dump: {0}")]
    ChainFormat(String),

    #[error("malformed rule record: {0}")]
    RuleFormat(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
