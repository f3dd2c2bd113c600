//! Round-k value of a scheme when the receiver learns it from counts, against the
//! value under known commitment. Exact enumeration where feasible, Monte Carlo beyond.
//!
//! `cargo run --release --example inference_gap -- [seed]`

use persuasion::games::{flower_game, flower_optimal_scheme};
use persuasion::inference::{exact_term_count, ir_k_exact, ir_k_monte_carlo, simulate_round_means, DEFAULT_EXACT_CAP};
use persuasion::model::{Distribution, JointScheme};
use persuasion::{bpr, PersuasionGame, RngSpec};

fn report(name: &str, game: &PersuasionGame, scheme: &JointScheme, seed: u64) -> persuasion::Result<()> {
    println!("{name}: BPR = {:.4}", bpr(game, scheme));
    for k in [1, 2, 4, 10, 100, 1000] {
        let mc = ir_k_monte_carlo(game, scheme, k, 20_000, &RngSpec::new(seed).child(k))?;
        let exact = if exact_term_count(scheme, k) <= DEFAULT_EXACT_CAP {
            format!("{:.4}", ir_k_exact(game, scheme, k)?)
        } else {
            "-".into()
        };
        println!("  k = {k:>5}  IR_k = {:.4} +- {:.4}  exact {exact}", mc.estimate, mc.std_error);
    }
    Ok(())
}

fn main() -> persuasion::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(0, |a| a.parse().expect("seed"));

    // the receiver wants to match the state; the sender always wants action 1
    let game = PersuasionGame::new(
        ndarray::array![[0.0, 1.0], [0.0, 1.0]],
        ndarray::array![[1.0, 0.0], [0.0, 1.0]],
        Distribution::new(vec![0.6, 0.4])?,
    )?;
    let scheme = JointScheme::for_game(&game, ndarray::array![[0.35, 0.25], [0.05, 0.35]])?;
    report("two-state game", &game, &scheme, seed)?;

    let flower = flower_game(4, 1.0 / 6.0)?;
    let optimal = flower_optimal_scheme(4, 1.0 / 6.0)?;
    report("flower n = 4, optimal scheme", &flower, &optimal, seed)?;

    // the same quantity read off simulated trajectories
    let means = simulate_round_means(&game, &scheme, 10, 5_000, &RngSpec::new(seed))?;
    let rounds: Vec<String> = means.iter().map(|m| format!("{:.3}", m.estimate)).collect();
    println!("simulated per-round means, rounds 1..10: {}", rounds.join(" "));
    Ok(())
}
