//! Shared error type.

/// Errors reported by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A model description is inconsistent or a parameter is out of range.
    #[error("configuration error: {0}")]
    Config(String),
    /// The requested quantity is undefined for the given model
    /// (zero variance, infinite moment, empty denominator).
    #[error("degenerate model: {0}")]
    Degenerate(String),
    /// The combination of options has no implemented closed form.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An exact enumeration would exceed its term budget.
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
