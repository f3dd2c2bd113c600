use rand::Rng;
use rand_distr::{Binomial, Distribution as _};

/// Draws `Multi(n, probs)` into `out` by sequential conditional binomials.
pub(crate) fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64], out: &mut [u64]) {
    debug_assert_eq!(probs.len(), out.len());
    out.iter_mut().for_each(|c| *c = 0);
    let Some(last) = probs.iter().rposition(|&p| p > 0.0) else {
        return;
    };
    let mut remaining = n;
    let mut mass_left: f64 = probs[..=last].iter().sum();
    for (i, &p) in probs[..=last].iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        if i == last || mass_left <= p {
            out[i] = remaining;
            break;
        }
        let q = (p / mass_left).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        out[i] = draw;
        remaining -= draw;
        mass_left -= p;
    }
}

/// Categorical draw from nonnegative weights summing to `total`.
pub(crate) fn categorical<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Running mean and variance, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Replicates per work unit. Fixed so that reductions do not depend on thread count.
pub(crate) const CHUNK: u64 = 512;

/// Runs `replicate(index)` for `0..n` in parallel chunks and merges moments in index order.
pub(crate) fn parallel_moments<F>(n: u64, replicate: F) -> Moments
where
    F: Fn(u64) -> f64 + Sync,
{
    use rayon::prelude::*;
    let n_chunks = n.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::default();
            for r in (c * CHUNK)..((c + 1) * CHUNK).min(n) {
                m.push(replicate(r));
            }
            m
        })
        .collect();
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

/// Vector-valued version of [`parallel_moments`]: `replicate(index, out)` fills `out`
/// (zeroed beforehand) and every coordinate gets its own moments.
pub(crate) fn parallel_vector_moments<F>(n: u64, len: usize, replicate: F) -> Vec<Moments>
where
    F: Fn(u64, &mut [f64]) + Sync,
{
    use rayon::prelude::*;
    let n_chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<Moments>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = vec![Moments::default(); len];
            let mut out = vec![0.0; len];
            for r in (c * CHUNK)..((c + 1) * CHUNK).min(n) {
                out.iter_mut().for_each(|v| *v = 0.0);
                replicate(r, &mut out);
                for (mi, &v) in m.iter_mut().zip(&out) {
                    mi.push(v);
                }
            }
            m
        })
        .collect();
    parts
        .into_iter()
        .reduce(|a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect())
        .unwrap_or_else(|| vec![Moments::default(); len])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSpec;

    #[test]
    fn multinomial_preserves_total_and_support() {
        let mut rng = RngSpec::new(3).rng();
        let probs = [0.2, 0.0, 0.5, 0.3];
        let mut out = [0u64; 4];
        for _ in 0..200 {
            multinomial(&mut rng, 37, &probs, &mut out);
            assert_eq!(out.iter().sum::<u64>(), 37);
            assert_eq!(out[1], 0);
        }
        multinomial(&mut rng, 0, &probs, &mut out);
        assert_eq!(out, [0, 0, 0, 0]);
    }

    #[test]
    fn moments_merge_matches_direct() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-14);
        assert!((merged.std_error() - whole.std_error()).abs() < 1e-14);
    }
}
