//! Runs an experiment config through the library, the same path `persuade run` takes.
//!
//! `cargo run --release --example run_experiment -- configs/smoke.toml /tmp/out`

use std::path::PathBuf;

use persuasion::cli::{run_experiment, ExperimentConfig};

fn main() -> persuasion::Result<()> {
    let mut args = std::env::args().skip(1);
    let config_path = PathBuf::from(args.next().expect("config path"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "results/example".into()));
    let config = ExperimentConfig::load(&config_path)?;
    println!("running {} with master seed {}", config.kind(), config.master_seed());
    let done = run_experiment(&config, &out)?;
    for entry in std::fs::read_dir(&done)? {
        println!("  {}", entry?.path().display());
    }
    Ok(())
}
