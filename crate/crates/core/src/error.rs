use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input of size {size} exceeds the enumeration limit of {limit}")]
    Capacity { size: usize, limit: usize },

    #[error("solver did not converge within {iterations} iterations (last objective {objective})")]
    Convergence { iterations: usize, objective: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("experiment cell {row} failed")]
    Task { row: String, source: Box<Error> },
}

impl Error {
    /// The innermost error, looking through experiment-cell wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Task { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
