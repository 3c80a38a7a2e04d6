//! Command-line front end: TOML configs, experiment presets and CSV output.

pub mod baseline;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

pub use baseline::{baseline_no_tbe, optimized_baseline};
pub use config::{load_config, parse_config, Experiment};
pub use error::{CliError, Result};
pub use presets::{run_experiment, ExperimentPreset, RunOptions, Summary};
