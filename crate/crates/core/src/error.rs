use thiserror::Error;

/// Error type shared by all pipeline stages in this crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A data or input file failed to parse. Carries the 1-based line number.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    /// An operation precondition or invariant was violated.
    #[error("{0}")]
    Invalid(String),
}

impl CoreError {
    pub fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        CoreError::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        CoreError::Invalid(message.into())
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
