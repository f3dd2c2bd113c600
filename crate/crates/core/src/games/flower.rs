//! Flower games: optimal posteriors sit exactly on receiver decision boundaries.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{Distribution, JointScheme, PersuasionGame, StackelbergGame};

/// Receiver actions of a flower game, in their fixed index order: all `Pure(j)` first,
/// then `Pair(j, k)` in lexicographic `(j, k)` order with `j != k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowerAction {
    /// Rewards the sender in state `j`.
    Pure(usize),
    /// Receiver bets on state `j` and against state `k`; worthless to the sender.
    Pair(usize, usize),
}

impl FlowerAction {
    pub fn index(self, n: usize) -> usize {
        match self {
            FlowerAction::Pure(j) => j,
            FlowerAction::Pair(j, k) => n + j * (n - 1) + if k < j { k } else { k - 1 },
        }
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        if index < n {
            return FlowerAction::Pure(index);
        }
        let rest = index - n;
        let j = rest / (n - 1);
        let slot = rest % (n - 1);
        let k = if slot < j { slot } else { slot + 1 };
        FlowerAction::Pair(j, k)
    }
}

pub fn flower_action_count(n: usize) -> usize {
    n + n * (n - 1)
}

fn check_domain(n: usize, tau: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::DomainViolation(format!("flower game needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0 / n as f64).contains(&tau) {
        return Err(Error::DomainViolation(format!("tau = {tau} outside [0, 1/{n}]")));
    }
    Ok(())
}

/// `(u_sender, u_receiver)` tables of the flower game, indexed `[state, action]`.
fn flower_tables(n: usize, tau: f64) -> (Array2<f64>, Array2<f64>) {
    let m = flower_action_count(n);
    let mut sender = Array2::zeros((n, m));
    let mut receiver = Array2::zeros((n, m));
    for a in 0..m {
        match FlowerAction::from_index(a, n) {
            FlowerAction::Pure(j) => {
                sender[[j, a]] = 1.0;
                receiver[[j, a]] = 1.0;
            }
            FlowerAction::Pair(j, k) => {
                for state in 0..n {
                    receiver[[state, a]] = tau;
                }
                receiver[[j, a]] += 1.0;
                receiver[[k, a]] -= 1.0;
            }
        }
    }
    (sender, receiver)
}

pub fn flower_game(n: usize, tau: f64) -> Result<PersuasionGame> {
    check_domain(n, tau)?;
    let (sender, receiver) = flower_tables(n, tau);
    PersuasionGame::new(sender, receiver, Distribution::uniform(n))
}

/// The known-commitment optimal scheme: `n` equiprobable signals, signal `i` puts
/// `1 - (n-1) tau` on state `i` and `tau` elsewhere.
pub fn flower_optimal_scheme(n: usize, tau: f64) -> Result<JointScheme> {
    check_domain(n, tau)?;
    let nf = n as f64;
    let x = Array2::from_shape_fn((n, n), |(state, signal)| {
        if state == signal {
            (1.0 - (nf - 1.0) * tau) / nf
        } else {
            tau / nf
        }
    });
    JointScheme::new(x)
}

/// Stackelberg game sharing the flower geometry: leader actions are the flower states,
/// the leader earns the sender's utility and the follower the receiver's.
pub fn flower_stackelberg(n: usize, tau: f64) -> Result<StackelbergGame> {
    check_domain(n, tau)?;
    let (sender, receiver) = flower_tables(n, tau);
    StackelbergGame::new(sender, receiver)
}

/// Leader strategy with `1/2 - eps/2` on the first action and the rest spread evenly.
pub fn stackelberg_eps_strategy(n: usize, eps: f64) -> Result<Distribution> {
    if n < 4 || !(0.0..=0.125).contains(&eps) {
        return Err(Error::DomainViolation(format!(
            "eps strategy needs n >= 4 and 0 <= eps <= 1/8, got n = {n}, eps = {eps}"
        )));
    }
    let head = 0.5 - eps / 2.0;
    let tail = (0.5 + eps / 2.0) / (n - 1) as f64;
    let mut probs = vec![tail; n];
    probs[0] = head;
    Distribution::new(probs)
}

/// The flower `tau` for which the optimal known-commitment value is one half.
pub fn half_value_tau(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64 - 1.0))
}
