//! Design for a boundedly rational receiver who plays `a` with probability proportional
//! to `exp(lambda * r_a)`, `r` being its expected utilities under the posterior.

use ndarray::Array2;

use super::config::OptimizerConfig;
use super::feasible::{project_feasible, FeasibleSet};
use super::sgd::{center_rows, initial_scheme, IterateRecord, OptimizerResult};
use crate::error::{Error, Result};
use crate::model::{bpr, JointScheme, PersuasionGame, ZERO_MASS};

/// Softmax of `lambda * r`, stabilized by subtracting the maximum.
pub fn quantal_response(r: &[f64], lambda: f64) -> Vec<f64> {
    let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = r.iter().map(|v| (lambda * (v - max)).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!("rationality constant must be nonnegative, got {lambda}")))
    }
}

/// Per active signal: column mass, receiver utilities under the posterior, response
/// probabilities and sender values `V_a = sum_w x[w, s] u_S(w, a)`.
struct SignalTerms {
    mass: f64,
    r: Vec<f64>,
    p: Vec<f64>,
    v: Vec<f64>,
}

fn signal_terms(game: &PersuasionGame, x: &Array2<f64>, s: usize, lambda: f64) -> Option<SignalTerms> {
    let column = x.column(s);
    let mass = column.sum();
    if mass < ZERO_MASS {
        return None;
    }
    let r: Vec<f64> = (0..game.n_actions()).map(|a| column.dot(&game.receiver_vector(a)) / mass).collect();
    let v: Vec<f64> = (0..game.n_actions()).map(|a| column.dot(&game.sender_vector(a))).collect();
    let p = quantal_response(&r, lambda);
    Some(SignalTerms { mass, r, p, v })
}

/// Sender's expected utility against the quantal receiver; `lambda = inf` is the exact
/// best-responding receiver.
pub fn br_objective(game: &PersuasionGame, scheme: &JointScheme, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda.is_infinite() {
        return Ok(bpr(game, scheme));
    }
    Ok((0..scheme.n_signals())
        .filter_map(|s| signal_terms(game, scheme.x(), s, lambda))
        .map(|t| t.p.iter().zip(&t.v).map(|(p, v)| p * v).sum::<f64>())
        .sum())
}

/// Analytic gradient of [`br_objective`] in the joint table:
/// `sum_a p_a u_S(w, a) + (lambda / m_s) sum_b p_b (u_R(w, b) - r_b) (V_b - sum_a p_a V_a)`.
pub fn br_gradient(game: &PersuasionGame, scheme: &JointScheme, lambda: f64) -> Result<Array2<f64>> {
    check_lambda(lambda)?;
    let (n, n_signals) = scheme.x().dim();
    let mut grad = Array2::zeros((n, n_signals));
    for s in 0..n_signals {
        if lambda.is_infinite() {
            if scheme.is_active(s) {
                let a = game.best_response_weighted(&scheme.column(s).to_vec());
                grad.column_mut(s).assign(&game.sender_vector(a));
            }
            continue;
        }
        let Some(t) = signal_terms(game, scheme.x(), s, lambda) else { continue };
        let mean_v: f64 = t.p.iter().zip(&t.v).map(|(p, v)| p * v).sum();
        for w in 0..n {
            let direct: f64 = t.p.iter().enumerate().map(|(a, p)| p * game.u_sender()[[w, a]]).sum();
            let response: f64 = (0..t.p.len())
                .map(|b| t.p[b] * (game.u_receiver()[[w, b]] - t.r[b]) * (t.v[b] - mean_v))
                .sum();
            grad[[w, s]] = direct + lambda / t.mass * response;
        }
    }
    Ok(grad)
}

/// Projected gradient ascent on [`br_objective`] with a decaying step. A step is only
/// accepted if the objective does not decrease (the step is halved until it does).
pub fn br_optimize(game: &PersuasionGame, lambda: f64, config: &OptimizerConfig) -> Result<OptimizerResult> {
    check_lambda(lambda)?;
    config.validate()?;
    let set = FeasibleSet::new(game);
    let mut scheme = initial_scheme(game)?;
    let mut value = br_objective(game, &scheme, lambda)?;
    let mut history = Vec::new();
    for t in 1..=config.max_iters {
        history.push(IterateRecord {
            iter: t - 1,
            objective_estimate: value,
            std_error: 0.0,
            constraint_residual: set.constraint_residual(scheme.x()),
        });
        let mut g = br_gradient(game, &scheme, lambda)?;
        center_rows(&mut g);
        let mut eta = config.step.at(t);
        let mut accepted = None;
        for _ in 0..40 {
            let candidate = project_feasible(&(scheme.x() + &(&g * eta)), &set)?;
            let candidate_value = br_objective(game, &candidate, lambda)?;
            if candidate_value >= value - 1e-12 {
                accepted = Some((candidate, candidate_value));
                break;
            }
            eta *= 0.5;
        }
        let Some((next, next_value)) = accepted else { break };
        let change = (next.x() - scheme.x()).iter().fold(0.0f64, |m, d| m.max(d.abs()));
        scheme = next;
        value = next_value.max(value);
        if change <= config.tolerance {
            break;
        }
    }
    Ok(OptimizerResult { scheme, history })
}
