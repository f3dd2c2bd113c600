use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::distribution::{Distribution, NEGATIVE_CLAMP, SUM_TOLERANCE};
use super::game::{table_from_rows, table_to_rows, PersuasionGame};
use crate::error::{Error, Result};

/// Column mass below which a signal is treated as never sent.
pub const ZERO_MASS: f64 = 1e-12;
/// Allowed deviation of a state's row sum from its prior probability.
pub const MARGINAL_TOLERANCE: f64 = 1e-8;

/// A signaling scheme stored as the joint distribution over `(state, signal)`.
///
/// The conditional `pi(state, signal) = x[state, signal] / prior[state]` is derived on
/// demand and never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemeFile", into = "SchemeFile")]
pub struct JointScheme {
    x: Array2<f64>,
}

impl JointScheme {
    pub fn new(x: Array2<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidScheme("empty table".into()));
        }
        let mut x = x;
        for v in x.iter_mut() {
            if !v.is_finite() || *v < NEGATIVE_CLAMP {
                return Err(Error::InvalidScheme(format!("entry {v} is not a probability")));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total = x.sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidScheme(format!("entries sum to {total}")));
        }
        Ok(JointScheme { x })
    }

    /// Builds a scheme and checks its state marginal against the game's prior.
    pub fn for_game(game: &PersuasionGame, x: Array2<f64>) -> Result<Self> {
        let scheme = JointScheme::new(x)?;
        scheme.check_consistent(game)?;
        Ok(scheme)
    }

    pub fn check_consistent(&self, game: &PersuasionGame) -> Result<()> {
        if self.n_states() != game.n_states() {
            return Err(Error::InvalidScheme(format!(
                "scheme has {} states, game has {}",
                self.n_states(),
                game.n_states()
            )));
        }
        for (state, row) in self.x.rows().into_iter().enumerate() {
            let mass = row.sum();
            if (mass - game.prior()[state]).abs() > MARGINAL_TOLERANCE {
                return Err(Error::InvalidScheme(format!(
                    "state {state} has mass {mass}, prior says {}",
                    game.prior()[state]
                )));
            }
        }
        Ok(())
    }

    /// Every state sent to the same signal: all posteriors equal the prior.
    pub fn uninformative(game: &PersuasionGame, n_signals: usize, signal: usize) -> Self {
        assert!(signal < n_signals);
        let mut x = Array2::zeros((game.n_states(), n_signals));
        for (state, &p) in game.prior().iter().enumerate() {
            x[[state, signal]] = p;
        }
        JointScheme { x }
    }

    /// One signal per state; every posterior is a point mass.
    pub fn fully_revealing(game: &PersuasionGame) -> Self {
        let n = game.n_states();
        let mut x = Array2::zeros((n, n));
        for (state, &p) in game.prior().iter().enumerate() {
            x[[state, state]] = p;
        }
        JointScheme { x }
    }

    pub fn n_states(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_signals(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn into_table(self) -> Array2<f64> {
        self.x
    }

    pub fn column(&self, signal: usize) -> ArrayView1<'_, f64> {
        self.x.column(signal)
    }

    pub fn column_mass(&self, signal: usize) -> f64 {
        self.x.column(signal).sum()
    }

    /// True if the signal is sent with probability above [`ZERO_MASS`].
    pub fn is_active(&self, signal: usize) -> bool {
        self.column_mass(signal) >= ZERO_MASS
    }

    /// Posterior over states after observing `signal`.
    pub fn posterior(&self, signal: usize) -> Result<Distribution> {
        let column = self.x.column(signal);
        let mass = column.sum();
        if mass < ZERO_MASS {
            return Err(Error::ZeroMarginal { signal });
        }
        Distribution::new(column.iter().map(|v| v / mass).collect())
    }

    /// Marginal distribution of signals.
    pub fn signal_marginal(&self) -> Distribution {
        let sums: Vec<f64> = self.x.columns().into_iter().map(|c| c.sum()).collect();
        Distribution::from_weights(&sums).expect("a valid scheme has unit mass")
    }

    /// Receiver action induced by each signal under known commitment; `None` for
    /// signals that are never sent.
    pub fn induced_actions(&self, game: &PersuasionGame) -> Vec<Option<usize>> {
        (0..self.n_signals())
            .map(|s| {
                if self.is_active(s) {
                    Some(game.best_response_weighted(&self.x.column(s).to_vec()))
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Known-commitment sender value: receivers best-respond to exact posteriors.
pub fn bpr(game: &PersuasionGame, scheme: &JointScheme) -> f64 {
    signal_contributions(game, scheme).iter().sum()
}

/// Per-signal contribution `sum_w x[w, s] * u_S(w, a(s))` to the known-commitment value.
pub fn signal_contributions(game: &PersuasionGame, scheme: &JointScheme) -> Vec<f64> {
    scheme
        .induced_actions(game)
        .into_iter()
        .enumerate()
        .map(|(s, action)| match action {
            Some(a) => scheme.column(s).dot(&game.sender_vector(a)),
            None => 0.0,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeFile {
    pub x: Vec<Vec<f64>>,
}

impl TryFrom<SchemeFile> for JointScheme {
    type Error = Error;

    fn try_from(file: SchemeFile) -> Result<Self> {
        let n_rows = file.x.len();
        let n_cols = file.x.first().map_or(0, Vec::len);
        let x = table_from_rows(&file.x, n_rows, n_cols, "x")
            .map_err(|e| Error::InvalidScheme(e.to_string()))?;
        JointScheme::new(x)
    }
}

impl From<JointScheme> for SchemeFile {
    fn from(scheme: JointScheme) -> Self {
        SchemeFile {
            x: table_to_rows(&scheme.x),
        }
    }
}
