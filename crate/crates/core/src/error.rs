use thiserror::Error;

/// Errors raised by tensor, word, polynomial and certification operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("symbol {symbol} at position {position} is outside the alphabet of size {alphabet}")]
    SymbolOutOfRange {
        position: usize,
        symbol: usize,
        alphabet: usize,
    },

    #[error("word support reaches position {support} but the monoid element only covers {domain}")]
    SupportOverflow { support: usize, domain: usize },

    #[error("zero pivot determinant while completing word {word}")]
    ZeroPivot { word: String },

    #[error("missing prerequisite value for word {0}")]
    MissingValue(String),

    #[error("operation requires the exact rational field")]
    ExactFieldRequired,

    #[error("monomial count {count} exceeds the guard of {limit}")]
    GuardExceeded { count: u128, limit: u128 },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
