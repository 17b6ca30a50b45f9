use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes shared by the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (index order, dimensions).
    #[error("contract violated: {0}")]
    Contract(String),

    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("numeric failure at iteration {iteration}: {detail}")]
    Numeric { iteration: usize, detail: String },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit status for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Validation(_) => 3,
            Error::Numeric { .. } | Error::NonConvergence(_) => 4,
            Error::Resource(_) => 5,
            Error::Contract(_) | Error::Domain(_) | Error::Io(_) => 1,
        }
    }
}
