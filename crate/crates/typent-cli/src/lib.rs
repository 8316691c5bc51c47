//! Library side of the `typent` experiment runner: configuration, engine
//! dispatch, report emission, and the preset cross-validation suite.

pub mod config;
pub mod report;
pub mod runner;
pub mod suite;

use thiserror::Error;

/// CLI-facing error classes, mapped to the exit-code contract
/// (2 = config error, 3 = resource error).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource error: {0}")]
    Resource(String),
}

impl CliError {
    /// Engine errors raised while interpreting user input.
    pub fn from_config(e: typent::Error) -> Self {
        match e {
            typent::Error::MemoryCap { .. } => CliError::Resource(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }

    /// Engine errors raised mid-computation.
    pub fn from_engine(e: typent::Error) -> Self {
        match e {
            typent::Error::MemoryCap { .. } | typent::Error::Computation(_) => {
                CliError::Resource(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}
