//! Experiment orchestration for the annealed evolutionary GAN toolkit.

pub mod config;
pub mod manifest;
pub mod run;

pub use config::{parse_config, parse_str, ConfigError, ExperimentConfig, Seeds};
pub use run::{run, RunError, RunOptions, RunReport};
