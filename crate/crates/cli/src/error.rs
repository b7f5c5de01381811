//! CLI error type carrying the process exit code.
//!
//! Exit codes: 0 success, 1 usage/config problems, 2 data problems
//! (unreadable or malformed corpora, traces, and metric inputs).

use std::fmt;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Usage or configuration problem (exit 1).
pub fn config_error(message: impl fmt::Display) -> CliError {
    CliError {
        code: 1,
        message: message.to_string(),
    }
}

/// Input-data problem (exit 2).
pub fn data_error(message: impl fmt::Display) -> CliError {
    CliError {
        code: 2,
        message: message.to_string(),
    }
}
