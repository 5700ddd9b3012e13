//! Library side of the batch CLI: command implementations, file formats,
//! and the reference demos, kept callable from integration tests.

pub mod commands;
pub mod demo;
pub mod io;

use thiserror::Error;

/// CLI failure modes, each with a stable exit code: 2 usage, 3 schema/I-O,
/// 4 recovery error, 5 demo mismatch.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Schema(String),
    #[error("recovery failed ({name}): {detail}")]
    Recovery { name: &'static str, detail: String },
    #[error("{0} printed value(s) deviate from the reference beyond tolerance")]
    DemoMismatch(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Schema(_) => 3,
            CliError::Recovery { .. } => 4,
            CliError::DemoMismatch(_) => 5,
        }
    }
}
