//! Gap bounds against measured losses for an interior scheme and the LP scheme.
//!
//! `cargo run --release --example bounds_diagnostics -- [seed]`

use persuasion::bounds::{entropy_gap_bound, gap_upper_bound};
use persuasion::games::{random_game, random_interior_scheme};
use persuasion::inference::ir_k_monte_carlo;
use persuasion::model::{boundary_distance, stochasticity};
use persuasion::solvers::solve_known_commitment_lp;
use persuasion::{bpr, RngSpec};

fn main() -> persuasion::Result<()> {
    let mut seed: u64 = std::env::args().nth(1).map_or(1, |a| a.parse().expect("seed"));
    // skip games where one action dominates and no scheme changes the outcome
    let (game, interior, lp) = loop {
        let game = random_game(3, 3, &RngSpec::new(seed))?;
        let lp = solve_known_commitment_lp(&game)?.scheme;
        let actions = lp.induced_actions(&game);
        let distinct = actions.iter().flatten().collect::<std::collections::BTreeSet<_>>().len();
        if distinct > 1 {
            if let Ok(interior) = random_interior_scheme(&game, 2, 0.02, 5000, &RngSpec::with_stream(seed, 1)) {
                break (game, interior, lp);
            }
        }
        seed += 1;
    };
    println!("game seed {seed}");

    for (name, scheme) in [("interior", &interior), ("lp", &lp)] {
        println!("{name} scheme, BPR = {:.4}", bpr(&game, scheme));
        for s in 0..scheme.n_signals() {
            if let Ok(y) = scheme.posterior(s) {
                println!(
                    "  signal {s}: mass {:.3}  nu {:.3}  d {:.4}",
                    scheme.column_mass(s),
                    stochasticity(&y),
                    boundary_distance(&game, &y)
                );
            }
        }
        println!("  entropy bound {:.3}", entropy_gap_bound(&game, scheme)?);
        for k in [1, 10, 100, 1000] {
            let e = ir_k_monte_carlo(&game, scheme, k, 10_000, &RngSpec::new(seed).child(k))?;
            println!(
                "  k = {k:>4}: measured gap {:+.4} +- {:.4}, bound {:.4}",
                bpr(&game, scheme) - e.estimate,
                e.std_error,
                gap_upper_bound(&game, scheme, k)?
            );
        }
    }
    Ok(())
}
