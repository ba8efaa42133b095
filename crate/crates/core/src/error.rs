//! Error type shared by all simulator and analysis operations.

use thiserror::Error;

/// Errors produced by waveform algebra, simulation, and analysis routines.
///
/// The variants map onto the exit-code categories used by the command-line
/// frontend: `Domain` and `Lookup` are caller mistakes, `Resource` signals a
/// runaway computation, and `Parse` covers malformed text artifacts.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// A table lookup (e.g. a calibration row) had no matching entry.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// A computation exceeded its configured resource budget.
    #[error("resource error: {0}")]
    Resource(String),

    /// A text artifact (waveform dump, calibration table, classifier file)
    /// could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
