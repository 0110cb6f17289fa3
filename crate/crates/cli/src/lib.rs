//! Library side of the `cbs` command-line tool.

pub mod config;
pub mod output;
pub mod run;
pub mod validate;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] cbs_core::CbsError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
