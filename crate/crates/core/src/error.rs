use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid space point: {0}")]
    InvalidPoint(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("size limit exceeded: {0}")]
    TooLarge(String),
    #[error("element is not proximal: {0}")]
    NotProximal(String),
    #[error("word ball needs {requested} products, budget is {cap}")]
    Budget { requested: u64, cap: u64 },
    #[error("not enough distinct words: {0}")]
    InsufficientWords(String),
}

pub type Result<T> = std::result::Result<T, Error>;
