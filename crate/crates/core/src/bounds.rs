//! Closed-form diagnostics for the cost of learning a commitment from samples.

use crate::error::{Error, Result};
use crate::model::{boundary_distance, conditional_entropy, stochasticity, JointScheme, PersuasionGame};

fn require_unit_range(game: &PersuasionGame) -> Result<()> {
    if game.sender_unit_range() {
        Ok(())
    } else {
        Err(Error::RangeViolation)
    }
}

/// `(mass, stochasticity, boundary distance)` of every signal that can occur.
fn active_posteriors(game: &PersuasionGame, scheme: &JointScheme) -> Vec<(f64, f64, f64)> {
    (0..scheme.n_signals())
        .filter_map(|s| {
            let y = scheme.posterior(s).ok()?;
            Some((scheme.column_mass(s), stochasticity(&y), boundary_distance(game, &y)))
        })
        .collect()
}

/// Upper bound on `BPR - IR_k`: `sum_s sqrt(p(s) / k) * nu(y_s) / d(y_s)`.
///
/// Deterministic posteriors contribute nothing; a stochastic posterior on a decision
/// boundary makes the bound infinite.
pub fn gap_upper_bound(game: &PersuasionGame, scheme: &JointScheme, k: u64) -> Result<f64> {
    require_unit_range(game)?;
    if k == 0 {
        return Err(Error::DomainViolation("k must be at least 1".into()));
    }
    let mut total = 0.0;
    for (mass, nu, d) in active_posteriors(game, scheme) {
        if nu == 0.0 {
            continue;
        }
        if d == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += (mass / k as f64).sqrt() * nu / d;
    }
    Ok(total)
}

/// `sqrt(|S|) * sqrt(H(state | signal)) / min_s d(y_s)`, over signals that can occur.
pub fn entropy_gap_bound(game: &PersuasionGame, scheme: &JointScheme) -> Result<f64> {
    require_unit_range(game)?;
    let posteriors = active_posteriors(game, scheme);
    let h = conditional_entropy(scheme);
    if h <= 0.0 {
        return Ok(0.0);
    }
    let d_min = posteriors.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    if d_min == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((posteriors.len() as f64).sqrt() * h.sqrt() / d_min)
}

/// Samples after which a follower facing the `eps`-shifted strategy in the `n`-action
/// flower game keeps the leader's value within `eps`:
/// `ceil(8 (ln 2n + ln(2/eps)) n / eps^2)`.
pub fn stackelberg_sufficient_k(n: usize, eps: f64) -> Result<u64> {
    if n < 4 || !(eps > 0.0 && eps <= 0.125) {
        return Err(Error::DomainViolation(format!(
            "need n >= 4 and 0 < eps <= 1/8, got n = {n}, eps = {eps}"
        )));
    }
    let n = n as f64;
    Ok((8.0 * ((2.0 * n).ln() + (2.0 / eps).ln()) * n / (eps * eps)).ceil() as u64)
}

/// Reference curve `(n - 1) / (16384 eps^2 (eps + 1/n))` for the samples any scheme in
/// the flower family needs to come within `eps` of the optimum. Valid for
/// `eps <= 1/320` and `n >= 2`.
pub fn flower_lower_bound_reference(n: usize, eps: f64) -> Result<f64> {
    if n < 2 || !(eps > 0.0 && eps <= 1.0 / 320.0) {
        return Err(Error::DomainViolation(format!(
            "need n >= 2 and 0 < eps <= 1/320, got n = {n}, eps = {eps}"
        )));
    }
    let n = n as f64;
    Ok((n - 1.0) / (16384.0 * eps * eps * (eps + 1.0 / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{flower_game, flower_optimal_scheme, random_game};
    use crate::model::{entropy, Distribution};
    use crate::rng::RngSpec;
    use ndarray::{array, Array2};
    use rand::Rng;

    fn two_state_game() -> PersuasionGame {
        PersuasionGame::new(
            array![[1.0, 0.0], [0.0, 1.0]],
            array![[1.0, 0.0], [0.0, 1.0]],
            Distribution::new(vec![0.3, 0.7]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn revealing_scheme_has_no_gap() {
        let g = two_state_game();
        let s = JointScheme::fully_revealing(&g);
        assert_eq!(gap_upper_bound(&g, &s, 1).unwrap(), 0.0);
        assert_eq!(entropy_gap_bound(&g, &s).unwrap(), 0.0);
    }

    #[test]
    fn boundary_posteriors_give_infinite_bound() {
        let g = flower_game(3, 0.25).unwrap();
        let s = flower_optimal_scheme(3, 0.25).unwrap();
        assert_eq!(gap_upper_bound(&g, &s, 10).unwrap(), f64::INFINITY);
        assert_eq!(entropy_gap_bound(&g, &s).unwrap(), f64::INFINITY);
    }

    #[test]
    fn bound_scales_with_inverse_root_k() {
        let g = two_state_game();
        let s = JointScheme::for_game(&g, array![[0.25, 0.05], [0.1, 0.6]]).unwrap();
        let b1 = gap_upper_bound(&g, &s, 7).unwrap();
        let b4 = gap_upper_bound(&g, &s, 28).unwrap();
        assert!(b1.is_finite() && b1 > 0.0);
        assert!((b4 - b1 / 2.0).abs() < 1e-12);
        assert!(gap_upper_bound(&g, &s, 0).is_err());
    }

    #[test]
    fn range_is_required() {
        let g = PersuasionGame::new(array![[2.0]], array![[0.0]], Distribution::uniform(1)).unwrap();
        let s = JointScheme::uninformative(&g, 1, 0);
        assert_eq!(gap_upper_bound(&g, &s, 1), Err(Error::RangeViolation));
        assert_eq!(entropy_gap_bound(&g, &s), Err(Error::RangeViolation));
    }

    #[test]
    fn single_signal_entropy_bound() {
        let g = two_state_game();
        let s = JointScheme::uninformative(&g, 1, 0);
        let expected = entropy(g.prior()).sqrt() / boundary_distance(&g, g.prior());
        assert!((entropy_gap_bound(&g, &s).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn entropy_bound_dominates_first_round_bound() {
        // nu^2 <= H per posterior, then Cauchy-Schwarz over signals
        for seed in 0..100 {
            let spec = RngSpec::new(seed);
            let g = random_game(3, 3, &spec).unwrap();
            let mut r = spec.child(1).rng();
            let x = Array2::from_shape_fn((3, 3), |_| r.random::<f64>() + 0.01);
            let x = &x / &x.sum_axis(ndarray::Axis(1)).insert_axis(ndarray::Axis(1)) / 3.0;
            let s = JointScheme::for_game(&g, x).unwrap();
            let k1 = gap_upper_bound(&g, &s, 1).unwrap();
            let e = entropy_gap_bound(&g, &s).unwrap();
            if e.is_finite() {
                assert!(e >= k1 - 1e-12, "seed {seed}: {e} < {k1}");
            }
        }
    }

    #[test]
    fn sufficient_k_values() {
        assert_eq!(stackelberg_sufficient_k(4, 0.125).unwrap(), 9937);
        let a = stackelberg_sufficient_k(4, 0.125).unwrap() as f64;
        let b = stackelberg_sufficient_k(8, 0.125).unwrap() as f64;
        let ratio = 2.0 * (16f64.ln() + 16f64.ln()) / (8f64.ln() + 16f64.ln());
        assert!((b / a - ratio).abs() < 1e-3);
        let half = stackelberg_sufficient_k(4, 0.0625).unwrap() as f64;
        assert!(half / a > 4.0 && half / a < 4.6);
        assert!(stackelberg_sufficient_k(3, 0.1).is_err());
        assert!(stackelberg_sufficient_k(4, 0.2).is_err());
    }

    #[test]
    fn lower_bound_reference_values() {
        let eps = 1.0 / 320.0;
        let v = flower_lower_bound_reference(2, eps).unwrap();
        assert!((v - 1.0 / (16384.0 * eps * eps * (eps + 0.5))).abs() < 1e-9 * v);
        let mut last = 0.0;
        for n in 2..50 {
            let v = flower_lower_bound_reference(n, eps).unwrap();
            assert!(v > last);
            last = v;
        }
        // eps = 1/n: (n - 1) n^3 / (2 * 16384)
        let n = 1000;
        let v = flower_lower_bound_reference(n, 1.0 / n as f64).unwrap();
        let lead = (n as f64).powi(4) / (2.0 * 16384.0);
        assert!((v / lead - 1.0).abs() < 2e-3);
        assert!(flower_lower_bound_reference(1, eps).is_err());
        assert!(flower_lower_bound_reference(4, 0.01).is_err());
    }
}
