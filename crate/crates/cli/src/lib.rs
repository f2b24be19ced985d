//! Experiment orchestration: demonstration files, training runs, meta-test
//! reports and ablations, each stage reading and writing declared files
//! under one output directory and finishing with a digest manifest.

pub mod commands;
pub mod config;
pub mod demos;
pub mod error;
pub mod manifest;

pub use config::{Context, ExperimentConfig, Overrides};
pub use error::{CliError, CliResult};
