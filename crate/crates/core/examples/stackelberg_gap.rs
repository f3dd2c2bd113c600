//! A follower who learns the leader's mixed strategy from samples: how many samples
//! keep the leader within eps of one half on the flower geometry.
//!
//! `cargo run --release --example stackelberg_gap`

use persuasion::bounds::stackelberg_sufficient_k;
use persuasion::games::{flower_stackelberg, half_value_tau, stackelberg_eps_strategy};
use persuasion::inference::stackelberg_ir_k;
use persuasion::RngSpec;

fn main() -> persuasion::Result<()> {
    for n in [4, 8] {
        let game = flower_stackelberg(n, half_value_tau(n))?;
        for eps in [0.125, 0.0625] {
            let strategy = stackelberg_eps_strategy(n, eps)?;
            let k_star = stackelberg_sufficient_k(n, eps)?;
            println!("n = {n}, eps = {eps}: sufficient k = {k_star}, target {:.4}", 0.5 - eps);
            for k in [10, 100, 1000, k_star] {
                let e = stackelberg_ir_k(&game, &strategy, k, 10_000, &RngSpec::new(n as u64).child(k))?;
                println!("  k = {k:>6}: leader value {:.4} +- {:.4}", e.estimate, e.std_error);
            }
        }
    }
    Ok(())
}
