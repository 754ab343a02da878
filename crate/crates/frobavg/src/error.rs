use thiserror::Error;

/// Errors across the library, grouped by the exit code they map to
/// in the CLI: 2 for precondition violations, 3 for failed internal
/// identities, 4 for resource-cap breaches.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("identity check failed: {0}")]
    Identity(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn identity(msg: impl Into<String>) -> Self {
        Error::Identity(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) => 2,
            Error::Identity(_) => 3,
            Error::Resource(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
