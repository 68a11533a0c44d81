//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by graph construction, enumeration guards, and numerics.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: malformed graph, weight vector, parameter, or file.
    #[error("validation: {0}")]
    Validation(String),
    /// A work bound was hit (tree enumeration, code scan) and the operation refused to continue.
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    /// Floating-point computation left its tolerated regime.
    #[error("numerics: {0}")]
    Numerics(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn guard(msg: impl Into<String>) -> Self {
        Error::GuardExceeded(msg.into())
    }

    pub fn numerics(msg: impl Into<String>) -> Self {
        Error::Numerics(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
