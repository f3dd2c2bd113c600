//! The measure-valued gradient of the round-k value against finite differences of the
//! exact value along random directions that keep the state marginals fixed.
//!
//! `cargo run --release --example gradient_check -- [k]`

use ndarray::Array2;
use persuasion::inference::ir_k_exact;
use persuasion::solvers::mvg_gradient;
use persuasion::{Distribution, JointScheme, PersuasionGame, RngSpec};
use rand::Rng;

fn main() -> persuasion::Result<()> {
    let k: u64 = std::env::args().nth(1).map_or(3, |a| a.parse().expect("k"));
    let game = PersuasionGame::new(
        ndarray::array![[0.0, 1.0], [0.0, 1.0]],
        ndarray::array![[1.0, 0.0], [0.0, 1.0]],
        Distribution::new(vec![0.6, 0.4])?,
    )?;
    let x = ndarray::array![[0.35, 0.25], [0.05, 0.35]];
    let scheme = JointScheme::for_game(&game, x.clone())?;
    let grad = mvg_gradient(&game, &scheme, k, 20_000, &RngSpec::new(1))?;
    let mut rng = RngSpec::new(2).rng();
    for _ in 0..5 {
        // zero row sums keep the marginals
        let mut d = Array2::from_shape_simple_fn(x.dim(), || rng.random::<f64>() - 0.5);
        for mut row in d.rows_mut() {
            let mean = row.sum() / row.len() as f64;
            row.mapv_inplace(|v| v - mean);
        }
        let h = 1e-5;
        let plus = JointScheme::for_game(&game, &x + &(&d * h))?;
        let minus = JointScheme::for_game(&game, &x - &(&d * h))?;
        let fd = (ir_k_exact(&game, &plus, k)? - ir_k_exact(&game, &minus, k)?) / (2.0 * h);
        let est = (&grad.gradient * &d).sum();
        println!("directional derivative: estimator {est:+.6}, finite difference {fd:+.6}");
    }
    Ok(())
}
