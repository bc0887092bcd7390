use thiserror::Error;

/// Errors produced by construction, encoding, configuration and I/O.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("message has {got} bits, expected {expected}")]
    MessageLength { got: usize, expected: usize },

    #[error("exhaustive enumeration refused for K = {0} (limit 24)")]
    TooLarge(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
