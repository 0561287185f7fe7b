use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain an operation accepts.
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// The eigensolver exhausted its iteration budget.
    #[error("eigensolver did not converge{}", context.as_deref().map(|c| format!(" at {c}")).unwrap_or_default())]
    Unconverged { context: Option<String> },
    /// An internal consistency check failed (e.g. an unpaired complex eigenvalue).
    #[error("consistency violation: {0}")]
    Consistency(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
