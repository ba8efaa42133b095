//! Harness-level errors, each mapped to a distinct process exit code.

use boolres_core::Error as CoreError;

/// What went wrong, at the granularity the exit code reports.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The invocation itself was malformed (unknown selector, missing
    /// argument).
    #[error("usage error: {0}")]
    Usage(String),
    /// A parameter or input value violated a documented precondition.
    #[error("{0}")]
    Domain(String),
    /// A computation exceeded its configured budget.
    #[error("{0}")]
    Resource(String),
    /// The filesystem did not cooperate.
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Resource(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Resource(_) => CliError::Resource(err.to_string()),
            CoreError::Domain(_) | CoreError::Lookup(_) | CoreError::Parse(_) => {
                CliError::Domain(err.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
