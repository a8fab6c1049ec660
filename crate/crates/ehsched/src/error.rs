use thiserror::Error;

/// Errors raised by the scheduling algorithms and their inputs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("unachievable: {0}")]
    Unachievable(String),
    #[error("empty profile: {0}")]
    EmptyProfile(&'static str),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
    #[error("bad model: {0}")]
    BadModel(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn bad_input(msg: impl Into<String>) -> Error {
    Error::BadInput(msg.into())
}

pub(crate) fn unachievable(msg: impl Into<String>) -> Error {
    Error::Unachievable(msg.into())
}
