//! Scenario runner behind the `qpball` command line.

pub mod config;
pub mod manifest;
pub mod runner;

use thiserror::Error;

pub use config::{validate, Scenario, ScenarioConfig, CONFIG_SCHEMA_VERSION};
pub use manifest::RunManifest;
pub use runner::{run_scenario, RunOutcome};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    /// Invalid configuration, including an exponent outside the nontrivial range.
    pub const INVALID_CONFIG: i32 = 2;
    pub const UNCONVERGED: i32 = 3;
    pub const CONTRACT: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Core(#[from] qpball::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => exit::FAILURE,
            Self::Parse(_) | Self::Config(_) => exit::INVALID_CONFIG,
            Self::Core(qpball::Error::InvalidParameter(_)) => exit::INVALID_CONFIG,
            Self::Core(qpball::Error::Contract(_)) => exit::CONTRACT,
            Self::Core(_) => exit::FAILURE,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
