use std::fmt;

use thiserror::Error;

/// Byte range plus human-readable position of a piece of source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{} (bytes {}..{})", self.line, self.column, self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {span}: {message}")]
    Parse { message: String, span: SourceSpan },
    #[error("invalid place {0}: not a prime")]
    InvalidPlace(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("ill-sorted: {0}")]
    IllSorted(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("signature error: {0}")]
    Signature(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("missing assignment for variable {0}")]
    MissingAssignment(String),
    #[error("no witness: {0}")]
    NoWitness(String),
    #[error("quantifier block of {found} variables exceeds the limit of {limit}")]
    BlockTooLarge { found: usize, limit: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::InvalidPlace(_) => 2,
            Error::Unsupported(_) | Error::Signature(_) | Error::BlockTooLarge { .. } => 3,
            Error::IllSorted(_) => 4,
            _ => 1,
        }
    }

    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            Error::Parse { span, .. } => Some(*span),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
