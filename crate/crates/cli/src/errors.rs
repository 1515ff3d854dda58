//! Process-level error split: data problems exit 1, failed checks exit 2.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Malformed input, unreadable files, bad flag values. Exit code 1.
    Data(String),
    /// A derivation, ordering, or equivalence check failed. Exit code 2.
    Verify(String),
}

impl CliError {
    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn verify(msg: impl Into<String>) -> Self {
        CliError::Verify(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 1,
            CliError::Verify(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Verify(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
