use ndarray::Array2;
use serde::Serialize;

use super::estimate::IrEstimate;
use super::sampling::{categorical, Moments, CHUNK};
use crate::error::{Error, Result};
use crate::model::{JointScheme, PersuasionGame};
use crate::rng::RngSpec;

/// One round of a repeated interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub state: usize,
    pub signal: usize,
    pub action: usize,
    pub sender_utility: f64,
}

/// Plays `k_max` rounds: the receiver answers each signal with a best response to the
/// counts seen so far (plus one seed sample per signal), then records the round.
pub fn simulate_rounds(
    game: &PersuasionGame,
    scheme: &JointScheme,
    k_max: u64,
    rng: &RngSpec,
) -> Result<Vec<RoundRecord>> {
    if k_max == 0 {
        return Err(Error::DomainViolation("k_max must be at least 1".into()));
    }
    if scheme.n_states() != game.n_states() {
        return Err(Error::InvalidScheme("scheme and game disagree on the state count".into()));
    }
    let mut records = Vec::with_capacity(k_max as usize);
    simulate_into(game, scheme, k_max, rng, |record| records.push(record));
    Ok(records)
}

fn simulate_into(game: &PersuasionGame, scheme: &JointScheme, k_max: u64, rng: &RngSpec, mut emit: impl FnMut(RoundRecord)) {
    let mut r = rng.rng();
    let (n_states, n_signals) = scheme.x().dim();
    let mut counts = Array2::<f64>::zeros((n_states, n_signals));
    for s in 0..n_signals {
        if scheme.is_active(s) {
            let column = scheme.column(s).to_vec();
            let total: f64 = column.iter().sum();
            counts[[categorical(&mut r, &column, total), s]] += 1.0;
        }
    }
    let flat: Vec<f64> = scheme.x().iter().copied().collect();
    let mut column = vec![0.0; n_states];
    for round in 1..=k_max {
        let cell = categorical(&mut r, &flat, 1.0);
        let (state, signal) = (cell / n_signals, cell % n_signals);
        for (w, c) in column.iter_mut().zip(counts.column(signal)) {
            *w = *c;
        }
        let action = game.best_response_weighted(&column);
        emit(RoundRecord {
            round,
            state,
            signal,
            action,
            sender_utility: game.u_sender()[[state, action]],
        });
        counts[[state, signal]] += 1.0;
    }
}

/// Per-round mean sender utility over `n_trajectories` independent runs; trajectory `t`
/// uses `rng.child(t)`. Entry `k - 1` estimates the round-`k` value.
pub fn simulate_round_means(
    game: &PersuasionGame,
    scheme: &JointScheme,
    k_max: u64,
    n_trajectories: u64,
    rng: &RngSpec,
) -> Result<Vec<IrEstimate>> {
    use rayon::prelude::*;
    if k_max == 0 || n_trajectories == 0 {
        return Err(Error::DomainViolation("need k_max >= 1 and at least one trajectory".into()));
    }
    if scheme.n_states() != game.n_states() {
        return Err(Error::InvalidScheme("scheme and game disagree on the state count".into()));
    }
    let n_chunks = n_trajectories.div_ceil(CHUNK);
    let parts: Vec<Vec<Moments>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = vec![Moments::default(); k_max as usize];
            for t in (c * CHUNK)..((c + 1) * CHUNK).min(n_trajectories) {
                simulate_into(game, scheme, k_max, &rng.child(t), |rec| {
                    m[(rec.round - 1) as usize].push(rec.sender_utility)
                });
            }
            m
        })
        .collect();
    let merged = parts.into_iter().reduce(|a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect());
    Ok(merged
        .expect("at least one chunk")
        .into_iter()
        .map(|m| IrEstimate {
            estimate: m.mean,
            std_error: m.std_error(),
            n_replicates: m.n,
        })
        .collect())
}

/// Running average of the realized sender utility.
pub fn cumulative_means(records: &[RoundRecord]) -> Vec<f64> {
    let mut total = 0.0;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            total += r.sender_utility;
            total / (i + 1) as f64
        })
        .collect()
}
