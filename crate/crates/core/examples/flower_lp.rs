//! Optimal known-commitment schemes for flower games via the design LP.
//!
//! `cargo run --example flower_lp -- [n_max]`

use persuasion::games::{flower_game, half_value_tau, signal_support_metric};
use persuasion::solvers::solve_known_commitment_lp;

fn main() -> persuasion::Result<()> {
    let n_max: usize = std::env::args().nth(1).map_or(6, |a| a.parse().expect("n_max"));
    println!("{:>3} {:>8} {:>10} {:>10} {:>12}", "n", "tau", "objective", "signals", "kkt");
    for n in 3..=n_max {
        let tau = half_value_tau(n);
        let game = flower_game(n, tau)?;
        let solution = solve_known_commitment_lp(&game)?;
        let used = signal_support_metric(&game, &solution.scheme)?;
        println!(
            "{n:>3} {tau:>8.4} {:>10.6} {used:>10} {:>12.2e}",
            solution.objective,
            solution.certificate.max_residual()
        );
    }
    Ok(())
}
