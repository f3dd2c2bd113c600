//! Measure-valued gradient of the round-`k` sender value with respect to the joint scheme.
//!
//! With `m = k - 1` joint samples `Z ~ Multi(m, X)` and seed draws `Y_s ~ y_s`, the value is
//! `sum_s E[v_s(act(Z_s + Y_s))]` where `v_s(a) = sum_w X(w, s) u_S(w, a)`. Differentiating
//! in `X(w, s)` gives three pieces:
//!
//! * direct: `E[u_S(w, act(Z_s + Y_s))]`;
//! * multinomial: `m E[v(act(Z~ + e_{w,s}))]` with `Z~ ~ Multi(m - 1, X)`, summed over
//!   every signal's term;
//! * seed: `sum_w0 (1{w0 = w} / c_s - X(w0, s) / c_s^2) E[v_s(act(Z_s + e_w0))]`, where
//!   `c_s` is the column sum.
//!
//! All pieces share one draw of `Z~` per replicate (with `Z = Z~` plus one more sample),
//! and seed values are summed out exactly rather than sampled.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::sampling::{multinomial, parallel_vector_moments};
use crate::inference::IrEstimate;
use crate::model::{select_action, JointScheme, PersuasionGame, TIE_TOLERANCE, ZERO_MASS};
use crate::rng::RngSpec;

/// Treatment of signals that are never sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroColumnPolicy {
    /// Fail with [`Error::DegenerateColumn`].
    Strict,
    /// Use the one-sided derivative into the column: moving mass `dx` of state `w` onto
    /// an unused signal earns `dx * u_S(w, BR(e_w))`.
    OneSided,
}

#[derive(Debug, Clone)]
pub struct MvgEstimate {
    /// `d IR_k / d X(w, s)`, indexed `[state, signal]`.
    pub gradient: Array2<f64>,
    pub std_error: Array2<f64>,
    /// IR_k estimated from the same replicates.
    pub objective: IrEstimate,
}

pub fn mvg_gradient(
    game: &PersuasionGame,
    scheme: &JointScheme,
    k: u64,
    replicates: u64,
    rng: &RngSpec,
) -> Result<MvgEstimate> {
    mvg_gradient_with(game, scheme, k, replicates, rng, MvgOptions::default())
}

/// Incremental best responses: receiver and sender scores for a base count column, to
/// which single state rows are added.
struct Scores<'a> {
    game: &'a PersuasionGame,
    receiver: Vec<f64>,
    sender: Vec<f64>,
    total: f64,
    scratch_r: Vec<f64>,
    scratch_s: Vec<f64>,
}

impl<'a> Scores<'a> {
    fn new(game: &'a PersuasionGame) -> Self {
        let m = game.n_actions();
        Scores {
            game,
            receiver: vec![0.0; m],
            sender: vec![0.0; m],
            total: 0.0,
            scratch_r: vec![0.0; m],
            scratch_s: vec![0.0; m],
        }
    }

    fn load(&mut self, column: impl Iterator<Item = u64>) {
        self.receiver.iter_mut().for_each(|v| *v = 0.0);
        self.sender.iter_mut().for_each(|v| *v = 0.0);
        self.total = 0.0;
        for (w, c) in column.enumerate() {
            if c == 0 {
                continue;
            }
            let c = c as f64;
            self.total += c;
            let (ur, us) = (self.game.u_receiver().row(w), self.game.u_sender().row(w));
            for a in 0..self.receiver.len() {
                self.receiver[a] += c * ur[a];
                self.sender[a] += c * us[a];
            }
        }
    }

    /// Best response to the loaded column plus one observation of each listed state.
    fn respond(&mut self, extra: &[usize]) -> usize {
        self.scratch_r.copy_from_slice(&self.receiver);
        self.scratch_s.copy_from_slice(&self.sender);
        for &w in extra {
            let (ur, us) = (self.game.u_receiver().row(w), self.game.u_sender().row(w));
            for a in 0..self.scratch_r.len() {
                self.scratch_r[a] += ur[a];
                self.scratch_s[a] += us[a];
            }
        }
        let total = self.total + extra.len() as f64;
        select_action(&self.scratch_r, &self.scratch_s, TIE_TOLERANCE * total)
    }
}

/// Estimator settings beyond the replicate count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct MvgOptions {
    pub zero_columns: ZeroColumnPolicy,
    /// Per signal, the last `j` joint samples are summed out exactly instead of drawn,
    /// with `j` the largest value whose count compositions number at most this cap.
    /// Exact summation lowers variance without changing the estimand; 1 disables it.
    pub enumeration_cap: usize,
}

impl Default for MvgOptions {
    fn default() -> Self {
        MvgOptions {
            zero_columns: ZeroColumnPolicy::Strict,
            enumeration_cap: 32,
        }
    }
}

fn compositions_count(j: usize, n: usize) -> usize {
    // C(j + n, n): ways to place j samples into n + 1 bins
    let mut acc: usize = 1;
    for i in 1..=n {
        acc = acc.saturating_mul(j + i) / i;
    }
    acc
}

/// Largest `j <= max_j` with at most `cap` compositions of `j` into `n + 1` bins.
fn enumerated_samples(max_j: u64, n: usize, cap: usize) -> u64 {
    let mut j = 0;
    while j < max_j && compositions_count(j as usize + 1, n) <= cap {
        j += 1;
    }
    j
}

/// Every composition of `total` into `bins.len()` parts with its multinomial probability.
fn for_each_weighted_composition(total: usize, probs: &[f64], visit: &mut impl FnMut(&[u64], f64)) {
    let mut bins = vec![0u64; probs.len()];
    let ln_fact = |v: usize| (1..=v).map(|i| (i as f64).ln()).sum::<f64>();
    let log_total = ln_fact(total);
    fn go(
        i: usize,
        left: usize,
        bins: &mut [u64],
        probs: &[f64],
        log_p: f64,
        ln_fact: &dyn Fn(usize) -> f64,
        visit: &mut dyn FnMut(&[u64], f64),
    ) {
        if i + 1 == bins.len() {
            bins[i] = left as u64;
            if left > 0 && probs[i] <= 0.0 {
                return;
            }
            let lp = if left > 0 { log_p + left as f64 * probs[i].ln() - ln_fact(left) } else { log_p };
            visit(bins, lp.exp());
            return;
        }
        for c in 0..=left {
            if c > 0 && probs[i] <= 0.0 {
                break;
            }
            bins[i] = c as u64;
            let lp = if c > 0 { log_p + c as f64 * probs[i].ln() - ln_fact(c) } else { log_p };
            go(i + 1, left - c, bins, probs, lp, ln_fact, visit);
        }
    }
    go(0, total, &mut bins, probs, log_total, &ln_fact, visit);
}

pub fn mvg_gradient_with(
    game: &PersuasionGame,
    scheme: &JointScheme,
    k: u64,
    replicates: u64,
    rng: &RngSpec,
    options: MvgOptions,
) -> Result<MvgEstimate> {
    if k == 0 || replicates == 0 {
        return Err(Error::DomainViolation("need k >= 1 and at least one replicate".into()));
    }
    let (n, n_signals) = scheme.x().dim();
    if n != game.n_states() {
        return Err(Error::InvalidScheme("scheme and game disagree on the state count".into()));
    }
    let x = scheme.x();
    let colsum: Vec<f64> = (0..n_signals).map(|s| scheme.column_mass(s)).collect();
    let active: Vec<bool> = colsum.iter().map(|&c| c >= ZERO_MASS).collect();
    if options.zero_columns == ZeroColumnPolicy::Strict {
        if let Some(signal) = active.iter().position(|a| !a) {
            return Err(Error::DegenerateColumn { signal });
        }
    }
    let values = crate::inference::signal_action_values(game, scheme);
    let n_actions = game.n_actions();
    let posterior: Vec<Vec<f64>> = (0..n_signals)
        .map(|s| (0..n).map(|w| if active[s] { x[[w, s]] / colsum[s] } else { 0.0 }).collect())
        .collect();
    let point_mass_value: Vec<f64> = (0..n)
        .map(|w| {
            let mut e = vec![0.0; n];
            e[w] = 1.0;
            game.u_sender()[[w, game.best_response_weighted(&e)]]
        })
        .collect();
    let column_law: Vec<Vec<f64>> = (0..n_signals)
        .map(|s| {
            let mut p: Vec<f64> = x.column(s).to_vec();
            p.push((1.0 - colsum[s]).max(0.0));
            p
        })
        .collect();
    let flat: Vec<f64> = x.iter().copied().collect();
    let m = k - 1;
    let mf = m as f64;
    // Z~ has m - 1 samples; the last `j` of them are summed out per signal
    let j = if m >= 1 { enumerated_samples(m - 1, n, options.enumeration_cap) } else { 0 };
    let drawn = if m >= 1 { m - 1 - j } else { 0 };
    let len = n * n_signals + 1;

    let moments = parallel_vector_moments(replicates, len, |r, out| {
        let mut rng = rng.child(r).rng();
        let mut z_drawn = vec![0u64; flat.len()];
        if drawn > 0 {
            multinomial(&mut rng, drawn, &flat, &mut z_drawn);
        }
        let mut scores = Scores::new(game);
        let mut base = vec![0.0; n_signals];
        let mut objective = 0.0;
        let mut one = vec![0usize; n];
        let mut two = vec![0usize; n * n];
        let mut column = vec![0u64; n];
        let mut action_weight = vec![0.0; n_actions];
        let mut seed_value = vec![0.0; n];
        let mut mult = vec![0.0; n];
        for s in 0..n_signals {
            if !active[s] {
                for w in 0..n {
                    out[w * n_signals + s] = point_mass_value[w];
                }
                continue;
            }
            let y = &posterior[s];
            let c = colsum[s];
            action_weight.iter_mut().for_each(|v| *v = 0.0);
            seed_value.iter_mut().for_each(|v| *v = 0.0);
            mult.iter_mut().for_each(|v| *v = 0.0);
            let mut base_s = 0.0;
            for_each_weighted_composition(j as usize, &column_law[s], &mut |comp, p| {
                for w in 0..n {
                    column[w] = z_drawn[w * n_signals + s] + comp[w];
                }
                scores.load(column.iter().copied());
                for w0 in 0..n {
                    one[w0] = scores.respond(&[w0]);
                }
                if m >= 1 {
                    for w in 0..n {
                        for w0 in w..n {
                            let a = scores.respond(&[w, w0]);
                            two[w * n + w0] = a;
                            two[w0 * n + w] = a;
                        }
                    }
                }
                // Z = Z~ + one sample: in state w of this column (prob x[w, s]) or elsewhere
                let elsewhere = if m >= 1 { (1.0 - c).max(0.0) } else { 1.0 };
                for w0 in 0..n {
                    let mut sv = elsewhere * values[[s, one[w0]]];
                    action_weight[one[w0]] += p * elsewhere * y[w0];
                    if m >= 1 {
                        for w in 0..n {
                            let xw = x[[w, s]];
                            if xw > 0.0 {
                                let a = two[w * n + w0];
                                sv += xw * values[[s, a]];
                                action_weight[a] += p * xw * y[w0];
                            }
                        }
                    }
                    seed_value[w0] += p * sv;
                    if m >= 1 && y[w0] > 0.0 {
                        base_s += p * mf * y[w0] * values[[s, one[w0]]];
                        for w in 0..n {
                            mult[w] += p * mf * y[w0] * values[[s, two[w * n + w0]]];
                        }
                    }
                }
            });
            base[s] = base_s;
            let weighted_seed: f64 = (0..n).map(|w0| x[[w0, s]] * seed_value[w0]).sum();
            objective += (0..n).map(|w0| y[w0] * seed_value[w0]).sum::<f64>();
            for w in 0..n {
                let direct: f64 = action_weight
                    .iter()
                    .enumerate()
                    .filter(|(_, &q)| q != 0.0)
                    .map(|(a, &q)| q * game.u_sender()[[w, a]])
                    .sum();
                out[w * n_signals + s] += direct + seed_value[w] / c - weighted_seed / (c * c) + mult[w];
            }
        }
        let base_total: f64 = base.iter().sum();
        for w in 0..n {
            for s in 0..n_signals {
                out[w * n_signals + s] += base_total - base[s];
            }
        }
        out[len - 1] = objective;
    });

    let gradient = Array2::from_shape_fn((n, n_signals), |(w, s)| moments[w * n_signals + s].mean);
    let std_error = Array2::from_shape_fn((n, n_signals), |(w, s)| moments[w * n_signals + s].std_error());
    let last = moments[len - 1];
    Ok(MvgEstimate {
        gradient,
        std_error,
        objective: IrEstimate {
            estimate: last.mean,
            std_error: last.std_error(),
            n_replicates: replicates,
        },
    })
}
