//! Safety alerts on a random city: how the planner's value spreads over signals for
//! the LP scheme and for a scheme designed for receivers who learn from counts.
//!
//! `cargo run --release --example safety_alert -- [seed]`

use persuasion::games::{safety_alert_game, signal_reward_decomposition, signal_support_metric, CityParams, SafetyCity};
use persuasion::inference::ir_k_monte_carlo;
use persuasion::solvers::{sgd_optimize, solve_known_commitment_lp, OptimizerConfig};
use persuasion::{bpr, JointScheme, PersuasionGame, RngSpec};

fn describe(name: &str, game: &PersuasionGame, scheme: &JointScheme) -> persuasion::Result<()> {
    let mut parts = signal_reward_decomposition(game, scheme);
    parts.sort_by(|a, b| b.total_cmp(a));
    let top: Vec<String> = parts.iter().take(8).map(|p| format!("{p:.3}")).collect();
    let ir = ir_k_monte_carlo(game, scheme, 100, 10_000, &RngSpec::new(11))?;
    println!(
        "{name}: BPR {:.4}, IR_100 {:.4} +- {:.4}, signals for 99% {}, largest contributions {}",
        bpr(game, scheme),
        ir.estimate,
        ir.std_error,
        signal_support_metric(game, scheme)?,
        top.join(" ")
    );
    Ok(())
}

fn main() -> persuasion::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(7, |a| a.parse().expect("seed"));
    let city = SafetyCity::random(&CityParams::default(), &RngSpec::new(seed))?;
    let game = safety_alert_game(&city)?;
    println!("city: {} nodes, {} edges, center {}", city.n_nodes, city.edges.len(), city.center);

    let lp = solve_known_commitment_lp(&game)?;
    describe("LP ", &game, &lp.scheme)?;
    let config = OptimizerConfig {
        max_iters: 50,
        batch_size: 200,
        k_opt: 100,
        master_seed: seed,
        ..OptimizerConfig::sgd_default()
    };
    let sgd = sgd_optimize(&game, &config)?;
    describe("SGD", &game, &sgd.scheme)?;
    Ok(())
}
