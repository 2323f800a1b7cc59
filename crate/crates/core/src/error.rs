use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a propagation or SINR equation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario or candidate set violates one of its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
