use ndarray::Array2;

use super::distribution::Distribution;
use super::game::{select_action, TIE_TOLERANCE};
use crate::error::{Error, Result};

/// Leader-follower game; tables are indexed `[leader action, follower action]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackelbergGame {
    u_leader: Array2<f64>,
    u_follower: Array2<f64>,
}

impl StackelbergGame {
    pub fn new(u_leader: Array2<f64>, u_follower: Array2<f64>) -> Result<Self> {
        if u_leader.is_empty() {
            return Err(Error::InvalidGame("empty action set".into()));
        }
        if u_leader.dim() != u_follower.dim() {
            return Err(Error::InvalidGame(format!(
                "leader table is {:?}, follower table is {:?}",
                u_leader.dim(),
                u_follower.dim()
            )));
        }
        if u_leader.iter().chain(u_follower.iter()).any(|u| !u.is_finite()) {
            return Err(Error::InvalidGame("non-finite utility".into()));
        }
        Ok(StackelbergGame { u_leader, u_follower })
    }

    pub fn n_leader_actions(&self) -> usize {
        self.u_leader.nrows()
    }

    pub fn n_follower_actions(&self) -> usize {
        self.u_leader.ncols()
    }

    pub fn u_leader(&self) -> &Array2<f64> {
        &self.u_leader
    }

    pub fn u_follower(&self) -> &Array2<f64> {
        &self.u_follower
    }

    /// Follower's best response to a leader mixed strategy, ties broken for the leader
    /// and then by lowest index.
    pub fn best_response(&self, strategy: &Distribution) -> usize {
        self.best_response_weighted(strategy.probs())
    }

    /// Best response to unnormalized leader-action weights (e.g. counts).
    pub fn best_response_weighted(&self, weights: &[f64]) -> usize {
        let n = self.n_follower_actions();
        let mut follower = vec![0.0; n];
        let mut leader = vec![0.0; n];
        let mut total = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            total += w;
            for a in 0..n {
                follower[a] += w * self.u_follower[[i, a]];
                leader[a] += w * self.u_leader[[i, a]];
            }
        }
        select_action(&follower, &leader, TIE_TOLERANCE * total)
    }

    /// Leader's value when the follower knows the strategy exactly.
    pub fn leader_value(&self, strategy: &Distribution) -> f64 {
        let a = self.best_response(strategy);
        strategy.dot(&self.u_leader.column(a).to_vec())
    }
}
