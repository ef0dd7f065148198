use thiserror::Error;

/// Failure classes shared by every module of the crate.
///
/// The variants line up with the exit statuses of the command-line tool:
/// malformed or hypothesis-violating input, exhausted work budgets and
/// broken internal invariants are kept apart so callers can react to each.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("graph hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("internal invariant failed: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Resource,
    Invariant,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Syntax { .. } | Error::Hypothesis(_) | Error::InvalidInput(_) => {
                ErrorKind::Input
            }
            Error::Resource(_) => ErrorKind::Resource,
            Error::Invariant(_) => ErrorKind::Invariant,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
