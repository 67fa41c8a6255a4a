use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input, schema violations and dangling references.
    #[error("parse error: {0}")]
    Parse(String),
    /// Input that parses but fails a mathematical check.
    #[error("validation failed: {0}")]
    Validation(String),
    /// Bad command-line usage, such as a missing operand.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Parse(_) | CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

pub fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}
