//! Reproducible experiment runner behind the `persuade` binary.
//!
//! `persuade run --config exp.toml` executes one experiment kind and writes CSV and
//! JSON results plus a resolved copy of the config. The remaining subcommands wrap
//! single library operations on JSON game and scheme files.

mod commands;
pub mod config;
pub mod experiments;
pub mod output;

pub use commands::{
    execute, exit_code, main_with_args, Cli, Command, EXIT_CONFIG, EXIT_NUMERIC, OUT_DIR_ENV, THREADS_ENV,
};
pub use config::{log_spaced, ExperimentConfig};
pub use experiments::{interior_instances, run_experiment};
pub use output::{RunDir, PARTIAL_MARKER};
