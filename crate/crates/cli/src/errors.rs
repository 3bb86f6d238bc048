//! Error classification behind the process exit codes.
//!
//! Input problems (missing files, parse failures, rejected values) exit
//! with 1. Violated invariants inside a stage (a non-finite loss, a failed
//! gradient check) exit with 2. Usage errors never reach this type; the
//! argument parser handles them and exits with 64.

use candela_core::CoreError;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input(message.into())
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError::Internal(message.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Core errors default to input rejections: nearly all of them report a
/// problem with user-supplied data. Stages that can violate their own
/// invariants (training, the gradient check) remap explicitly.
impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o error: {e}"))
    }
}

/// Remaps a core error to the internal class; used where a failure means
/// the pipeline itself broke rather than the input being bad.
pub fn internal(e: CoreError) -> CliError {
    CliError::Internal(e.to_string())
}

pub type Result<T> = std::result::Result<T, CliError>;
