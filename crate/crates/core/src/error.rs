//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Ambient or matrix dimensions do not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A mathematical precondition of the requested formula is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An identity that must hold for every valid input failed numerically,
    /// which signals a rank-tolerance bug rather than bad input.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    /// Malformed input file or JSON payload.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
