//! Simplex geometry: stochasticity, entropy, divergence and distance to the
//! receiver's decision boundaries.

use super::distribution::Distribution;
use super::game::PersuasionGame;
use super::scheme::JointScheme;

/// `sqrt(sum_i x_i (1 - x_i))`.
pub fn stochasticity(x: &Distribution) -> f64 {
    x.iter().map(|p| p * (1.0 - p)).sum::<f64>().max(0.0).sqrt()
}

/// Shannon entropy in nats.
pub fn entropy(x: &Distribution) -> f64 {
    -x.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
}

/// Conditional entropy of the state given the signal, `sum_s p(s) H(y_s)`.
pub fn conditional_entropy(scheme: &JointScheme) -> f64 {
    (0..scheme.n_signals())
        .filter_map(|s| {
            let mass = scheme.column_mass(s);
            scheme.posterior(s).ok().map(|y| mass * entropy(&y))
        })
        .sum()
}

/// `KL(p || q)` in nats; infinite when `p` puts mass where `q` does not.
pub fn kl_divergence(p: &Distribution, q: &Distribution) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return f64::INFINITY;
        }
        total += pi * (pi / qi).ln();
    }
    total.max(0.0)
}

/// Euclidean projection of `v` onto `{y >= 0, sum y = 1}`.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    project_to_scaled_simplex(v, 1.0)
}

/// Euclidean projection of `v` onto `{y >= 0, sum y = total}` (sort-based).
pub fn project_to_scaled_simplex(v: &[f64], total: f64) -> Vec<f64> {
    if total <= 0.0 {
        return vec![0.0; v.len()];
    }
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - total) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&u| (u - theta).max(0.0)).collect()
}

/// Distance from `x` to `{y in simplex : <y, w> = 0}`, or `None` when that set is empty.
///
/// Solved through the one-dimensional dual: for a multiplier `beta`, the minimizer over
/// the simplex is the projection of `x - beta * w`, and `<w, y(beta)>` is monotone
/// nonincreasing and piecewise linear in `beta`.
pub fn distance_to_indifference(x: &[f64], w: &[f64]) -> Option<f64> {
    let w_min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let w_max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if w_min > 0.0 || w_max < 0.0 {
        return None;
    }
    if w_min == 0.0 && w_max == 0.0 {
        return Some(0.0);
    }
    let project = |beta: f64| -> Vec<f64> {
        let shifted: Vec<f64> = x.iter().zip(w).map(|(xi, wi)| xi - beta * wi).collect();
        project_to_simplex(&shifted)
    };
    let slope = |y: &[f64]| -> f64 { y.iter().zip(w).map(|(a, b)| a * b).sum() };

    let g0 = slope(x);
    if g0 == 0.0 {
        return Some(0.0);
    }
    // root lies on the side of zero where g changes sign
    let direction = if g0 > 0.0 { 1.0 } else { -1.0 };
    let mut near = 0.0;
    let mut far = direction;
    let mut y_far = project(far);
    let mut g_far = slope(&y_far);
    let mut guard = 0;
    while g_far * direction > 0.0 {
        near = far;
        far *= 2.0;
        y_far = project(far);
        g_far = slope(&y_far);
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let mut y_near = project(near);
    let mut g_near = slope(&y_near);
    for _ in 0..200 {
        let mid = 0.5 * (near + far);
        if mid == near || mid == far {
            break;
        }
        let y_mid = project(mid);
        let g_mid = slope(&y_mid);
        if g_mid == 0.0 {
            y_near = y_mid;
            g_near = 0.0;
            break;
        }
        if g_mid * direction > 0.0 {
            near = mid;
            y_near = y_mid;
            g_near = g_mid;
        } else {
            far = mid;
            y_far = y_mid;
            g_far = g_mid;
        }
    }
    // y is affine in beta on a single piece, so interpolating to g = 0 is exact there.
    let y: Vec<f64> = if g_near == 0.0 || g_near == g_far {
        y_near
    } else {
        let t = g_near / (g_near - g_far);
        y_near.iter().zip(&y_far).map(|(a, b)| a + t * (b - a)).collect()
    };
    Some(
        y.iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt(),
    )
}

/// Distance from `x` to the nearest boundary of the region where the receiver plays
/// its current best response. Infinite when no competing boundary meets the simplex.
pub fn boundary_distance(game: &PersuasionGame, x: &Distribution) -> f64 {
    let action = game.best_response(x);
    let own = game.receiver_vector(action);
    let mut best = f64::INFINITY;
    let mut w = vec![0.0; game.n_states()];
    for other in 0..game.n_actions() {
        if other == action {
            continue;
        }
        let rival = game.receiver_vector(other);
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = own[i] - rival[i];
        }
        if let Some(d) = distance_to_indifference(x.probs(), &w) {
            best = best.min(d);
        }
    }
    best
}
