use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed instance, config or argument.
    #[error("invalid input: {0}")]
    Input(String),
    /// The instance exceeds a size bound (oracle enumeration limits).
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A condition that should be unreachable for valid inputs.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
