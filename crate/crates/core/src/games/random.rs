use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{boundary_distance, Distribution, JointScheme, PersuasionGame};
use crate::rng::RngSpec;

/// Uniform prior with i.i.d. uniform `[0, 1]` utilities for both players.
pub fn random_game(n_states: usize, n_actions: usize, rng: &RngSpec) -> Result<PersuasionGame> {
    let mut r = rng.rng();
    let u_receiver = Array2::from_shape_simple_fn((n_states, n_actions), || r.random::<f64>());
    let u_sender = Array2::from_shape_simple_fn((n_states, n_actions), || r.random::<f64>());
    PersuasionGame::new(u_sender, u_receiver, Distribution::uniform(n_states))
}

/// Random scheme whose posteriors all lie at least `min_distance` from every receiver
/// decision boundary. Each state's row is uniform on the simplex scaled by its prior;
/// draws are rejected until the condition holds (at most `max_tries` attempts).
pub fn random_interior_scheme(
    game: &PersuasionGame,
    n_signals: usize,
    min_distance: f64,
    max_tries: usize,
    rng: &RngSpec,
) -> Result<JointScheme> {
    let mut r = rng.rng();
    let n = game.n_states();
    for _ in 0..max_tries {
        let mut x = Array2::zeros((n, n_signals));
        for w in 0..n {
            // exponential spacings give a uniform point on the simplex
            let e: Vec<f64> = (0..n_signals).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
            let total: f64 = e.iter().sum();
            for s in 0..n_signals {
                x[[w, s]] = game.prior()[w] * e[s] / total;
            }
        }
        let scheme = JointScheme::for_game(game, x)?;
        let interior = (0..n_signals).all(|s| match scheme.posterior(s) {
            Ok(y) => boundary_distance(game, &y) > min_distance,
            Err(_) => false,
        });
        if interior {
            return Ok(scheme);
        }
    }
    Err(Error::NoConvergence(format!(
        "no scheme with boundary distance above {min_distance} in {max_tries} draws"
    )))
}
