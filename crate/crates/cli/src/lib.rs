//! Command-line driver for the reinsurance equilibrium solver.
//!
//! The binary is a thin wrapper around [`app::run`]; the pieces live here so
//! tests can call them directly.

pub mod app;
pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] config::ConfigError),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("invalid parameters: {0}")]
    Params(reins_core::Error),
    #[error("solver error: {0}")]
    Solver(reins_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CliError {
    /// Sorts a core error into bad input or solver failure.
    pub fn from_core(e: reins_core::Error) -> Self {
        use reins_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Config(_) => CliError::Params(e),
            _ => CliError::Solver(e),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Params(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) | CliError::Validation(_) => 1,
        }
    }
}
