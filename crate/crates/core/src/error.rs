//! Error type shared by all modules.

use std::fmt;

/// Errors produced by constructors, samplers, and pipelines.
#[derive(Debug)]
pub enum Error {
    /// A caller-supplied parameter violates a precondition.
    Parameter(String),
    /// A text-format instance failed to parse.
    Parse(String),
    /// A Las Vegas construction ran out of retry budget.
    /// `best` carries the best quality reached (code distance, etc.).
    Construction {
        what: String,
        attempts: usize,
        best: Option<usize>,
    },
    /// An internal invariant that the reduction lemmas guarantee was violated.
    /// Seeing this is a bug signal, never a normal outcome.
    Invariant(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Construction {
                what,
                attempts,
                best,
            } => {
                write!(f, "construction of {what} failed after {attempts} attempts")?;
                if let Some(b) = best {
                    write!(f, " (best achieved: {b})")?;
                }
                Ok(())
            }
            Error::Invariant(msg) => write!(f, "internal invariant violated: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
