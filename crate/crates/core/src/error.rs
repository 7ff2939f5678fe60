use std::fmt;
use std::io;

use crate::mpscalar::PrecisionSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(PrecisionSpec, PrecisionSpec),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Overflow, inexact underflow or a non-finite operand.
    #[error("range error: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("{0}")]
    Format(FormatError),

    #[error("measurement anomaly: {0}")]
    Measurement(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// A malformed matrix dump or tuning table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "format error: {}", self.message)
        } else {
            write!(f, "format error at line {}: {}", self.line, self.message)
        }
    }
}

impl Error {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format(FormatError {
            line,
            message: message.into(),
        })
    }

    pub(crate) fn range(message: impl Into<String>) -> Self {
        Error::Range(message.into())
    }

    pub(crate) fn usage(message: impl Into<String>) -> Self {
        Error::Usage(message.into())
    }

    pub(crate) fn shape(message: impl Into<String>) -> Self {
        Error::Shape(message.into())
    }
}
