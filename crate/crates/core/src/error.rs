use thiserror::Error;

/// Errors reported by the screening library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument or configuration violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
