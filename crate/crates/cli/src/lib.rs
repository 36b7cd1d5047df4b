//! Experiment runner around the `cpdcast` engine: TOML configs, run
//! directories and run comparison.

pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{CliError, Stage};
