use ndarray::Array2;

use super::sampling::{categorical, multinomial};
use crate::error::{Error, Result};
use crate::model::{Distribution, JointScheme, PersuasionGame};
use crate::rng::RngSpec;

/// The receiver's `(state, signal)` observation counts before round `round`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceiverCounts {
    counts: Array2<u64>,
    round: u64,
}

impl ReceiverCounts {
    pub fn new(counts: Array2<u64>, round: u64) -> Result<Self> {
        if round == 0 {
            return Err(Error::DomainViolation("rounds start at 1".into()));
        }
        Ok(ReceiverCounts { counts, round })
    }

    pub fn counts(&self) -> &Array2<u64> {
        &self.counts
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn total(&self) -> u64 {
        self.counts.sum()
    }

    pub fn column_total(&self, signal: usize) -> u64 {
        self.counts.column(signal).sum()
    }

    /// Normalized counts of one signal's column.
    pub fn empirical_posterior(&self, signal: usize) -> Result<Distribution> {
        let column = self.counts.column(signal);
        let total = column.sum();
        if total == 0 {
            return Err(Error::ZeroColumn { signal });
        }
        Distribution::new(column.iter().map(|&c| c as f64 / total as f64).collect())
    }
}

/// One draw of the receiver's counts at round `k`: `k - 1` joint samples from the scheme
/// plus one seed sample from the true posterior of every signal that can occur.
pub fn sample_counts(game: &PersuasionGame, scheme: &JointScheme, k: u64, rng: &RngSpec) -> Result<ReceiverCounts> {
    if k == 0 {
        return Err(Error::DomainViolation("k must be at least 1".into()));
    }
    if scheme.n_states() != game.n_states() {
        return Err(Error::InvalidScheme("scheme and game disagree on the state count".into()));
    }
    let mut r = rng.rng();
    let (n_states, n_signals) = scheme.x().dim();
    let flat: Vec<f64> = scheme.x().iter().copied().collect();
    let mut drawn = vec![0u64; flat.len()];
    multinomial(&mut r, k - 1, &flat, &mut drawn);
    let mut counts = Array2::from_shape_vec((n_states, n_signals), drawn).expect("shape");
    for s in 0..n_signals {
        if !scheme.is_active(s) {
            continue;
        }
        let column = scheme.column(s).to_vec();
        let total: f64 = column.iter().sum();
        let state = categorical(&mut r, &column, total);
        counts[[state, s]] += 1;
    }
    ReceiverCounts::new(counts, k)
}
