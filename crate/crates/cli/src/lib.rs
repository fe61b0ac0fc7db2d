//! Library half of the command-line front end: configuration, job runners
//! and the acceptance-check engine, kept separate from argument parsing so
//! integration tests can drive them directly.

pub mod acceptance;
pub mod config;
pub mod jobs;

use thiserror::Error;

/// Exit-code taxonomy: configuration problems exit 1, numerical failures
/// exit 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(cavity_ps::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}
