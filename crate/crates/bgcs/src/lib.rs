//! Std companion to `bgcs-core`: deterministic parallel Monte Carlo,
//! JSON/CSV reports, the sparse triplet dump and the command implementations
//! behind the `bgcs` binary.

pub mod commands;
pub mod dump;
pub mod parallel;
pub mod report;

use clap::ValueEnum;

pub use commands::{run, Cli, Command};
pub use report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] bgcs_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const BREACH: i32 = 2;
}
