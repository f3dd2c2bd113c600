//! Rationality sweep over random games: the regularized design's value as the receiver
//! collects samples, averaged over seeded games.
//!
//! `cargo run --release --example random_games -- [n_games]`

use persuasion::games::random_game;
use persuasion::inference::ir_k_monte_carlo;
use persuasion::solvers::{br_optimize, solve_known_commitment_lp, OptimizerConfig};
use persuasion::{JointScheme, RngSpec};

fn main() -> persuasion::Result<()> {
    let n_games: u64 = std::env::args().nth(1).map_or(10, |a| a.parse().expect("n_games"));
    let ks = [1, 10, 100, 1000];
    let lambdas = [5.0, 20.0, 80.0];
    let mut sums = vec![[0.0; 4]; lambdas.len() + 1];
    for g in 0..n_games {
        let game = random_game(3, 3, &RngSpec::new(g))?;
        let mut schemes: Vec<JointScheme> = vec![solve_known_commitment_lp(&game)?.scheme];
        for &lambda in &lambdas {
            schemes.push(br_optimize(&game, lambda, &OptimizerConfig::pgd_default())?.scheme);
        }
        for (row, scheme) in sums.iter_mut().zip(&schemes) {
            for (slot, &k) in row.iter_mut().zip(&ks) {
                *slot += ir_k_monte_carlo(&game, scheme, k, 2_000, &RngSpec::new(1000 + g).child(k))?.estimate;
            }
        }
    }
    println!("mean IR_k over {n_games} games at k = {ks:?}");
    let names = std::iter::once("lp".to_string()).chain(lambdas.iter().map(|l| format!("br {l}")));
    for (name, row) in names.zip(&sums) {
        let means: Vec<String> = row.iter().map(|s| format!("{:.4}", s / n_games as f64)).collect();
        println!("  {name:<8} {}", means.join("  "));
    }
    Ok(())
}
