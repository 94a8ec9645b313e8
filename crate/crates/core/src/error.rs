use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// Variants are grouped by the exit code the command-line front end maps them
/// to (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("degenerate function: all Hermite coefficients are below {0:e}")]
    Degenerate(f64),
    #[error("series diverges: {0}")]
    Divergence(String),
    #[error("circulant embedding failed: minimum eigenvalue {0:e}")]
    EmbeddingFailure(f64),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("regression support does not cover the grid: {0}")]
    Coverage(String),
    #[error("unsupported functional: {0}")]
    Unsupported(String),
    #[error("inconsistent moments: {0}")]
    InconsistentMoments(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 2 precondition-type errors, 3 capacity, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 3,
            Error::Io(_) | Error::Json(_) => 4,
            _ => 2,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
