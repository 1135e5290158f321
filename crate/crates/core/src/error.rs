use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A block size that is not a power of two, or is outside the supported range.
    #[error("invalid block size {0}: {1}")]
    BlockSize(usize, &'static str),

    /// The policy handed to the simulator does not cover the requested state.
    #[error("policy mismatch: {0}")]
    PolicyMismatch(String),

    /// A numerical routine failed to produce a trustworthy value.
    #[error("numeric diagnostic: {0}")]
    Numeric(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
