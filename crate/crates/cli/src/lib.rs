//! Experiment harness: resolves a configuration, runs one experiment, writes
//! its outputs and a manifest of content hashes.

pub mod config;
pub mod error;
mod outputs;
pub mod run;

pub use config::{Cli, ExperimentConfig, NodeSource, Params, Subcommand};
pub use error::CliError;
pub use run::{run, OutputRecord, RunManifest};
