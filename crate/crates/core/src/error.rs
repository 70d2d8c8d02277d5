use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An element or index is not a member of the poset, graph or table it was used with.
    #[error("domain error: {0}")]
    Domain(String),
    /// An operation was called with its precondition violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integer overflow while accumulating {0}")]
    Overflow(String),
    /// A brute-force routine was asked to work beyond its configured size cap.
    #[error("size limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A subproblem evaluation failed; `element` names the subproblem.
    #[error("evaluation of {element} failed: {msg}")]
    Evaluation { element: String, msg: String },
    #[error("ledger integrity error: {0}")]
    Integrity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
