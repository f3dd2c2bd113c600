//! Designing for a learning receiver: projected stochastic gradient ascent on the
//! round-k value, started between the LP optimum and the uninformative scheme.
//!
//! `cargo run --release --example sgd_design -- [k_opt] [iters]`

use persuasion::games::flower_game;
use persuasion::inference::ir_k_monte_carlo;
use persuasion::solvers::{solve_known_commitment_lp, sgd_optimize, OptimizerConfig};
use persuasion::{bpr, RngSpec};

fn main() -> persuasion::Result<()> {
    let mut args = std::env::args().skip(1);
    let k_opt: u64 = args.next().map_or(300, |a| a.parse().expect("k_opt"));
    let iters: u64 = args.next().map_or(100, |a| a.parse().expect("iters"));
    let game = flower_game(4, 1.0 / 6.0)?;
    let lp = solve_known_commitment_lp(&game)?.scheme;
    let config = OptimizerConfig {
        k_opt,
        max_iters: iters,
        master_seed: 1,
        ..OptimizerConfig::sgd_default()
    };
    let result = sgd_optimize(&game, &config)?;
    for h in result.history.iter().step_by((iters as usize / 10).max(1)) {
        println!(
            "iter {:>4}: IR_{k_opt} ~ {:.4} +- {:.4}",
            h.iter, h.objective_estimate, h.std_error
        );
    }
    let eval = RngSpec::new(99).child(k_opt);
    let sgd = ir_k_monte_carlo(&game, &result.scheme, k_opt, 10_000, &eval)?;
    let base = ir_k_monte_carlo(&game, &lp, k_opt, 10_000, &eval)?;
    println!("LP : BPR {:.4}  IR_{k_opt} {:.4} +- {:.4}", bpr(&game, &lp), base.estimate, base.std_error);
    println!("SGD: BPR {:.4}  IR_{k_opt} {:.4} +- {:.4}", bpr(&game, &result.scheme), sgd.estimate, sgd.std_error);
    Ok(())
}
