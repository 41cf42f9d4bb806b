//! Exit-code discipline: 0 success, 1 runtime failure, 2 usage/config error.

use std::fmt;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Usage or configuration problem: exit 2.
pub fn usage(message: String) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message,
    }
}

/// Runtime failure: exit 1.
pub fn runtime(message: String) -> CliError {
    CliError {
        code: EXIT_RUNTIME,
        message,
    }
}

impl From<itemgraph::Error> for CliError {
    fn from(e: itemgraph::Error) -> Self {
        runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        runtime(e.to_string())
    }
}
