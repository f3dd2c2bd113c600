use ndarray::Array2;
use serde::Serialize;

use super::counts::sample_counts;
use super::sampling::parallel_moments;
use crate::error::{Error, Result};
use crate::model::{JointScheme, PersuasionGame};
use crate::rng::RngSpec;

/// Default cap on the number of terms [`ir_k_exact`] may enumerate.
pub const DEFAULT_EXACT_CAP: u128 = 10_000_000;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_replicates: u64,
}

/// `values[[s, a]] = sum_w x[w, s] * u_S(w, a)`: what the sender earns from signal `s`
/// when the receiver answers it with `a`.
pub fn signal_action_values(game: &PersuasionGame, scheme: &JointScheme) -> Array2<f64> {
    scheme.x().t().dot(game.u_sender())
}

fn check_inputs(game: &PersuasionGame, scheme: &JointScheme, k: u64) -> Result<()> {
    if k == 0 {
        return Err(Error::DomainViolation("k must be at least 1".into()));
    }
    if scheme.n_states() != game.n_states() {
        return Err(Error::InvalidScheme(format!(
            "scheme has {} states, game has {}",
            scheme.n_states(),
            game.n_states()
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of the sender's round-`k` value when the receiver best-responds
/// to empirical posteriors. Replicate `r` uses the stream `rng.child(r)`.
pub fn ir_k_monte_carlo(
    game: &PersuasionGame,
    scheme: &JointScheme,
    k: u64,
    n_replicates: u64,
    rng: &RngSpec,
) -> Result<IrEstimate> {
    check_inputs(game, scheme, k)?;
    if n_replicates == 0 {
        return Err(Error::DomainViolation("need at least one replicate".into()));
    }
    let values = signal_action_values(game, scheme);
    let active: Vec<usize> = (0..scheme.n_signals()).filter(|&s| scheme.is_active(s)).collect();
    let moments = parallel_moments(n_replicates, |r| {
        let counts = sample_counts(game, scheme, k, &rng.child(r)).expect("k checked above");
        active
            .iter()
            .map(|&s| {
                let weights: Vec<f64> = counts.counts().column(s).iter().map(|&c| c as f64).collect();
                values[[s, game.best_response_weighted(&weights)]]
            })
            .sum()
    });
    Ok(IrEstimate {
        estimate: moments.mean,
        std_error: moments.std_error(),
        n_replicates,
    })
}

fn binomial_coefficient(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Terms [`ir_k_exact`] enumerates: per active signal, every split of the `k - 1` joint
/// samples into that signal's states plus "elsewhere", times every seed state.
pub fn exact_term_count(scheme: &JointScheme, k: u64) -> u128 {
    let n_states = scheme.n_states() as u64;
    let per_signal = binomial_coefficient(k - 1 + n_states, n_states).saturating_mul(n_states as u128);
    let active = (0..scheme.n_signals()).filter(|&s| scheme.is_active(s)).count() as u128;
    per_signal.saturating_mul(active)
}

/// Exact round-`k` value by enumeration.
///
/// The receiver's action on signal `s` depends only on that signal's column of counts,
/// whose law is multinomial over the column's states plus one "other signals" bin, so
/// the expectation splits into one enumeration per signal.
pub fn ir_k_exact(game: &PersuasionGame, scheme: &JointScheme, k: u64) -> Result<f64> {
    ir_k_exact_with_cap(game, scheme, k, DEFAULT_EXACT_CAP)
}

pub fn ir_k_exact_with_cap(game: &PersuasionGame, scheme: &JointScheme, k: u64, cap: u128) -> Result<f64> {
    check_inputs(game, scheme, k)?;
    let terms = exact_term_count(scheme, k);
    if terms > cap {
        return Err(Error::TooLarge { terms, cap });
    }
    let n_states = scheme.n_states();
    let samples = (k - 1) as usize;
    let ln_factorial: Vec<f64> = std::iter::once(0.0)
        .chain((1..=samples).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let values = signal_action_values(game, scheme);

    let mut total = 0.0;
    let mut bins = vec![0usize; n_states + 1];
    for s in 0..scheme.n_signals() {
        if !scheme.is_active(s) {
            continue;
        }
        let column = scheme.column(s).to_vec();
        let mass: f64 = column.iter().sum();
        let mut probs = column.clone();
        probs.push((1.0 - mass).max(0.0));
        let ln_probs: Vec<f64> = probs.iter().map(|p| p.ln()).collect();
        let posterior: Vec<f64> = column.iter().map(|v| v / mass).collect();

        let mut signal_total = 0.0;
        let mut weights = vec![0.0; n_states];
        for_each_composition(samples, &mut bins, 0, &mut |bins| {
            let mut ln_p = ln_factorial[samples];
            for (i, &c) in bins.iter().enumerate() {
                if c > 0 {
                    if probs[i] <= 0.0 {
                        return;
                    }
                    ln_p += c as f64 * ln_probs[i] - ln_factorial[c];
                }
            }
            let p = ln_p.exp();
            for (seed, &y) in posterior.iter().enumerate() {
                if y == 0.0 {
                    continue;
                }
                for (w, &c) in weights.iter_mut().zip(bins.iter()) {
                    *w = c as f64;
                }
                weights[seed] += 1.0;
                let action = game.best_response_weighted(&weights);
                signal_total += p * y * values[[s, action]];
            }
        });
        total += signal_total;
    }
    Ok(total)
}

/// Calls `visit` with every way of writing `remaining` as an ordered sum over `bins`.
fn for_each_composition(remaining: usize, bins: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
    if start + 1 == bins.len() {
        bins[start] = remaining;
        visit(bins);
        return;
    }
    for c in 0..=remaining {
        bins[start] = c;
        for_each_composition(remaining - c, bins, start + 1, visit);
    }
}
