use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid word: letter {letter} outside 1..={alphabet}")]
    InvalidWord { letter: usize, alphabet: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("interior block is not eliminable: {0}")]
    NonEliminable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("divergent system: {0}")]
    Divergence(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
