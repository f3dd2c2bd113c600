//! Schemes optimized against a quantal-response receiver, and how they fare once the
//! receiver instead learns from counts.
//!
//! `cargo run --release --example regularized_design`

use persuasion::games::flower_game;
use persuasion::inference::ir_k_monte_carlo;
use persuasion::solvers::{br_objective, br_optimize, OptimizerConfig};
use persuasion::{bpr, RngSpec};

fn main() -> persuasion::Result<()> {
    let game = flower_game(4, 1.0 / 6.0)?;
    let config = OptimizerConfig::pgd_default();
    println!("{:>6} {:>9} {:>8} {:>8} {:>8} {:>8}", "lambda", "BR value", "BPR", "IR_50", "IR_300", "IR_1000");
    for lambda in [10.0, 30.0, 60.0, 90.0, f64::INFINITY] {
        let result = br_optimize(&game, lambda, &config)?;
        let ir = |k: u64| -> persuasion::Result<f64> {
            Ok(ir_k_monte_carlo(&game, &result.scheme, k, 10_000, &RngSpec::new(5).child(k))?.estimate)
        };
        println!(
            "{lambda:>6} {:>9.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            br_objective(&game, &result.scheme, lambda)?,
            bpr(&game, &result.scheme),
            ir(50)?,
            ir(300)?,
            ir(1000)?
        );
    }
    Ok(())
}
