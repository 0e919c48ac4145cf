//! Experiment harness: verification suites, convergence sweeps and the
//! constant search, with JSON and CSV reports.

pub mod commands;
pub mod config;
pub mod report;
pub mod search;

pub use commands::run;
pub use config::{Command, ConfigOverrides, RunConfig};
pub use report::{CheckRecord, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hardy_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
