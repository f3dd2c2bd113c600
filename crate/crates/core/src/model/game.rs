use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::distribution::Distribution;
use crate::error::{Error, Result};

/// Receiver values closer than this (per unit of belief mass) count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// A finite Bayesian persuasion problem.
///
/// Utility tables are indexed `[state, action]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameFile", into = "GameFile")]
pub struct PersuasionGame {
    u_sender: Array2<f64>,
    u_receiver: Array2<f64>,
    prior: Distribution,
    sender_unit_range: bool,
}

impl PersuasionGame {
    pub fn new(u_sender: Array2<f64>, u_receiver: Array2<f64>, prior: Distribution) -> Result<Self> {
        let (n_states, n_actions) = u_sender.dim();
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidGame("empty state or action set".into()));
        }
        if u_receiver.dim() != (n_states, n_actions) {
            return Err(Error::InvalidGame(format!(
                "receiver table is {:?}, sender table is {:?}",
                u_receiver.dim(),
                u_sender.dim()
            )));
        }
        if prior.len() != n_states {
            return Err(Error::InvalidGame(format!(
                "prior has {} entries for {} states",
                prior.len(),
                n_states
            )));
        }
        if u_sender.iter().chain(u_receiver.iter()).any(|u| !u.is_finite()) {
            return Err(Error::InvalidGame("non-finite utility".into()));
        }
        let sender_unit_range = u_sender.iter().all(|&u| (0.0..=1.0).contains(&u));
        Ok(PersuasionGame {
            u_sender,
            u_receiver,
            prior,
            sender_unit_range,
        })
    }

    pub fn n_states(&self) -> usize {
        self.u_sender.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.u_sender.ncols()
    }

    pub fn u_sender(&self) -> &Array2<f64> {
        &self.u_sender
    }

    pub fn u_receiver(&self) -> &Array2<f64> {
        &self.u_receiver
    }

    /// Sender utility vector over states for `action`.
    pub fn sender_vector(&self, action: usize) -> ArrayView1<'_, f64> {
        self.u_sender.column(action)
    }

    /// Receiver utility vector over states for `action`.
    pub fn receiver_vector(&self, action: usize) -> ArrayView1<'_, f64> {
        self.u_receiver.column(action)
    }

    pub fn prior(&self) -> &Distribution {
        &self.prior
    }

    pub fn sender_unit_range(&self) -> bool {
        self.sender_unit_range
    }

    /// The receiver's action for a belief, breaking ties for the sender.
    pub fn best_response(&self, belief: &Distribution) -> usize {
        debug_assert_eq!(belief.len(), self.n_states());
        self.best_response_weighted(belief.probs())
    }

    /// Best response to an unnormalized nonnegative belief (for example raw counts).
    ///
    /// The tie tolerance scales with the total weight, so the result equals the best
    /// response to the normalized belief.
    pub fn best_response_weighted(&self, weights: &[f64]) -> usize {
        let n_actions = self.n_actions();
        let mut receiver = vec![0.0; n_actions];
        let mut sender = vec![0.0; n_actions];
        let mut total = 0.0;
        for (state, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            total += w;
            let ur = self.u_receiver.row(state);
            let us = self.u_sender.row(state);
            for a in 0..n_actions {
                receiver[a] += w * ur[a];
                sender[a] += w * us[a];
            }
        }
        select_action(&receiver, &sender, TIE_TOLERANCE * total)
    }

    /// Same game with the receiver's utilities replaced by `scale * u_R + shift`.
    pub fn with_receiver_affine(&self, scale: f64, shift: f64) -> Result<Self> {
        PersuasionGame::new(
            self.u_sender.clone(),
            self.u_receiver.mapv(|u| scale * u + shift),
            self.prior.clone(),
        )
    }
}

/// Picks the action maximizing `receiver` (ties within `tol`), then `sender`
/// (ties within `tol`), then the lowest index.
pub fn select_action(receiver: &[f64], sender: &[f64], tol: f64) -> usize {
    debug_assert_eq!(receiver.len(), sender.len());
    let best_receiver = receiver.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cutoff = best_receiver - tol;
    let best_sender = receiver
        .iter()
        .zip(sender)
        .filter(|(r, _)| **r >= cutoff)
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    receiver
        .iter()
        .zip(sender)
        .position(|(r, s)| *r >= cutoff && *s >= best_sender - tol)
        .expect("nonempty action set")
}

/// On-disk JSON shape; rows are states, columns actions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub n_states: usize,
    pub n_actions: usize,
    pub prior: Vec<f64>,
    pub u_sender: Vec<Vec<f64>>,
    pub u_receiver: Vec<Vec<f64>>,
}

pub(crate) fn table_from_rows(rows: &[Vec<f64>], n_rows: usize, n_cols: usize, what: &str) -> Result<Array2<f64>> {
    if rows.len() != n_rows || rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::InvalidGame(format!(
            "{what} must be {n_rows} rows of {n_cols} entries"
        )));
    }
    Ok(Array2::from_shape_fn((n_rows, n_cols), |(i, j)| rows[i][j]))
}

pub(crate) fn table_to_rows(table: &Array2<f64>) -> Vec<Vec<f64>> {
    table.rows().into_iter().map(|r| r.to_vec()).collect()
}

impl TryFrom<GameFile> for PersuasionGame {
    type Error = Error;

    fn try_from(file: GameFile) -> Result<Self> {
        let u_sender = table_from_rows(&file.u_sender, file.n_states, file.n_actions, "u_sender")?;
        let u_receiver = table_from_rows(&file.u_receiver, file.n_states, file.n_actions, "u_receiver")?;
        let prior = Distribution::new(file.prior)?;
        PersuasionGame::new(u_sender, u_receiver, prior)
    }
}

impl From<PersuasionGame> for GameFile {
    fn from(game: PersuasionGame) -> Self {
        GameFile {
            n_states: game.n_states(),
            n_actions: game.n_actions(),
            prior: game.prior.probs().to_vec(),
            u_sender: table_to_rows(&game.u_sender),
            u_receiver: table_to_rows(&game.u_receiver),
        }
    }
}
