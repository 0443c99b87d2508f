use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The caller broke a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("linear regime (p = 2): the Bellman function is linear, no foliation")]
    LinearRegime,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
