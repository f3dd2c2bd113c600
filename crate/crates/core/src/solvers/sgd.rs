use std::collections::VecDeque;

use ndarray::{Array2, Axis};
use serde::Serialize;

use super::config::OptimizerConfig;
use super::feasible::{project_feasible, FeasibleSet};
use super::lp::solve_known_commitment_lp;
use super::mvg::{mvg_gradient_with, MvgOptions};
use crate::error::Result;
use crate::model::{JointScheme, PersuasionGame};
use crate::rng::RngSpec;

/// One optimizer iteration, evaluated at the iterate before its step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateRecord {
    pub iter: u64,
    pub objective_estimate: f64,
    pub std_error: f64,
    pub constraint_residual: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizerResult {
    pub scheme: JointScheme,
    pub history: Vec<IterateRecord>,
}

/// Interior starting point: the known-commitment optimum averaged with the scheme that
/// always recommends the receiver's prior best response, projected.
pub fn initial_scheme(game: &PersuasionGame) -> Result<JointScheme> {
    let set = FeasibleSet::new(game);
    let lp = solve_known_commitment_lp(game)?;
    let blend = (lp.scheme.x() + set.uninformative().x()) * 0.5;
    project_feasible(&blend, &set)
}

/// Removes each row's mean. Row-constant directions are normal to the feasible set, so
/// the projected step is unchanged while the raw step stays closer to the set.
pub(crate) fn center_rows(g: &mut Array2<f64>) {
    let means = g.mean_axis(Axis(1)).expect("nonempty rows");
    for (mut row, mean) in g.rows_mut().into_iter().zip(means) {
        row -= mean;
    }
}

/// Returns the projected average of the last iterates (or the start if no step is taken).
pub(crate) fn tail_average(tail: &VecDeque<Array2<f64>>, set: &FeasibleSet) -> Result<JointScheme> {
    let mut mean = Array2::zeros(tail[0].dim());
    for x in tail {
        mean += x;
    }
    mean /= tail.len() as f64;
    project_feasible(&mean, set)
}

/// Projected stochastic gradient ascent on IR_{k_opt} with measure-valued gradients.
pub fn sgd_optimize(game: &PersuasionGame, config: &OptimizerConfig) -> Result<OptimizerResult> {
    config.validate()?;
    let start = initial_scheme(game)?;
    sgd_from(game, start, config)
}

/// [`sgd_optimize`] from a given feasible start.
pub fn sgd_from(game: &PersuasionGame, start: JointScheme, config: &OptimizerConfig) -> Result<OptimizerResult> {
    config.validate()?;
    let set = FeasibleSet::new(game);
    let rng = RngSpec::new(config.master_seed);
    let options = MvgOptions {
        zero_columns: config.zero_columns,
        enumeration_cap: config.enumeration_cap,
    };
    let mut x = start.into_table();
    let mut tail = VecDeque::with_capacity(config.tail_average_window);
    tail.push_back(x.clone());
    let mut history = Vec::with_capacity(config.max_iters as usize);
    for t in 1..=config.max_iters {
        let scheme = JointScheme::for_game(game, x.clone())?;
        let est = mvg_gradient_with(game, &scheme, config.k_opt, config.batch_size, &rng.child(t), options)?;
        history.push(IterateRecord {
            iter: t - 1,
            objective_estimate: est.objective.estimate,
            std_error: est.objective.std_error,
            constraint_residual: set.constraint_residual(&x),
        });
        let mut g = est.gradient;
        center_rows(&mut g);
        let raw = &x + &(g * config.step.at(t));
        x = project_feasible(&raw, &set)?.into_table();
        if tail.len() == config.tail_average_window {
            tail.pop_front();
        }
        tail.push_back(x.clone());
    }
    if config.max_iters == 0 {
        return Ok(OptimizerResult {
            scheme: JointScheme::for_game(game, x)?,
            history,
        });
    }
    Ok(OptimizerResult {
        scheme: tail_average(&tail, &set)?,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::random_game;
    use crate::inference::ir_k_monte_carlo;
    use crate::model::Distribution;
    use ndarray::array;

    fn small_config() -> OptimizerConfig {
        OptimizerConfig {
            max_iters: 15,
            batch_size: 200,
            k_opt: 10,
            ..OptimizerConfig::sgd_default()
        }
    }

    #[test]
    fn zero_iterations_return_start() {
        let g = random_game(3, 3, &RngSpec::new(1)).unwrap();
        let config = OptimizerConfig { max_iters: 0, ..small_config() };
        let result = sgd_optimize(&g, &config).unwrap();
        assert_eq!(result.scheme, initial_scheme(&g).unwrap());
        assert!(result.history.is_empty());
    }

    #[test]
    fn iterates_stay_feasible_and_are_reproducible() {
        let g = random_game(3, 3, &RngSpec::new(4)).unwrap();
        let a = sgd_optimize(&g, &small_config()).unwrap();
        let b = sgd_optimize(&g, &small_config()).unwrap();
        assert_eq!(a.scheme, b.scheme);
        assert_eq!(a.history, b.history);
        assert_eq!(a.history.len(), 15);
        assert!(a.history.iter().all(|r| r.constraint_residual <= 1e-7));
        assert!(FeasibleSet::new(&g).constraint_residual(a.scheme.x()) <= 1e-7);
    }

    #[test]
    fn aligned_game_keeps_revealing_value() {
        let g = PersuasionGame::new(
            array![[1.0, 0.0], [0.0, 1.0]],
            array![[1.0, 0.0], [0.0, 1.0]],
            Distribution::new(vec![0.6, 0.4]).unwrap(),
        )
        .unwrap();
        let lp = solve_known_commitment_lp(&g).unwrap();
        let result = sgd_optimize(&g, &OptimizerConfig { max_iters: 40, ..small_config() }).unwrap();
        let spec = RngSpec::new(99);
        let a = ir_k_monte_carlo(&g, &lp.scheme, 10, 20_000, &spec).unwrap();
        let b = ir_k_monte_carlo(&g, &result.scheme, 10, 20_000, &spec).unwrap();
        let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!(b.estimate >= a.estimate - 3.0 * se - 1e-3, "{a:?} vs {b:?}");
    }

    #[test]
    fn centering_removes_row_means() {
        let mut g = array![[1.0, 3.0], [2.0, 2.0]];
        center_rows(&mut g);
        assert_eq!(g, array![[-1.0, 1.0], [0.0, 0.0]]);
    }
}
