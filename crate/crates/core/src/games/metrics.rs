use crate::error::{Error, Result};
use crate::model::{bpr, signal_contributions, JointScheme, PersuasionGame};

/// Share of the known-commitment value the smallest signal set must cover.
pub const SUPPORT_COVERAGE: f64 = 0.99;

/// Per-signal contribution `sum_w p(w, s) u_S(w, a(s))`; sums to the known-commitment value.
pub fn signal_reward_decomposition(game: &PersuasionGame, scheme: &JointScheme) -> Vec<f64> {
    signal_contributions(game, scheme)
}

/// Size of the smallest signal set whose contributions reach 99% of the
/// known-commitment value. Taking the largest contributions first is optimal.
pub fn signal_support_metric(game: &PersuasionGame, scheme: &JointScheme) -> Result<usize> {
    let value = bpr(game, scheme);
    if !(value > 0.0) {
        return Err(Error::ZeroValue);
    }
    let mut contributions = signal_contributions(game, scheme);
    contributions.sort_by(|a, b| b.total_cmp(a));
    let target = SUPPORT_COVERAGE * value * (1.0 - 1e-12);
    let mut covered = 0.0;
    for (i, c) in contributions.iter().enumerate() {
        covered += c;
        if covered >= target {
            return Ok(i + 1);
        }
    }
    Ok(contributions.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{flower_game, flower_optimal_scheme};
    use crate::model::Distribution;
    use ndarray::{array, Array2};

    #[test]
    fn flower_needs_every_signal() {
        let g = flower_game(4, 1.0 / 6.0).unwrap();
        let s = flower_optimal_scheme(4, 1.0 / 6.0).unwrap();
        assert_eq!(signal_support_metric(&g, &s).unwrap(), 4);
        let parts = signal_reward_decomposition(&g, &s);
        let total = bpr(&g, &s);
        for p in &parts {
            assert!((p - total / 4.0).abs() < 1e-12);
        }
        assert!((parts.iter().sum::<f64>() - total).abs() < 1e-10);
    }

    #[test]
    fn single_signal_and_revealing() {
        let n = 5;
        let g = PersuasionGame::new(
            Array2::eye(n),
            Array2::eye(n),
            Distribution::uniform(n),
        )
        .unwrap();
        let s = JointScheme::uninformative(&g, 3, 2);
        assert_eq!(signal_support_metric(&g, &s).unwrap(), 1);
        assert_eq!(signal_reward_decomposition(&g, &s)[0], 0.0);
        let s = JointScheme::fully_revealing(&g);
        assert_eq!(signal_support_metric(&g, &s).unwrap(), n);
    }

    #[test]
    fn zero_value_errors() {
        let g = PersuasionGame::new(array![[0.0, 0.0]], array![[1.0, 0.0]], Distribution::uniform(1)).unwrap();
        let s = JointScheme::uninformative(&g, 1, 0);
        assert_eq!(signal_support_metric(&g, &s), Err(Error::ZeroValue));
    }
}
