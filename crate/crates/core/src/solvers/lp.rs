//! Dense two-phase simplex for small linear programs, and the known-commitment design LP.

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use super::feasible::FeasibleSet;
use crate::error::{Error, Result};
use crate::model::{JointScheme, PersuasionGame};

/// `max c^T x  s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_eq: Array2<f64>,
    pub b_eq: Vec<f64>,
    pub a_ub: Array2<f64>,
    pub b_ub: Vec<f64>,
}

/// Optimality evidence evaluated on the original data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KktCertificate {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub duality_gap: f64,
}

impl KktCertificate {
    pub fn max_residual(&self) -> f64 {
        self.primal_residual.max(self.dual_residual).max(self.duality_gap)
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub y_eq: Vec<f64>,
    pub y_ub: Vec<f64>,
    pub certificate: KktCertificate,
    pub pivots: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-11;
const HARRIS_TOL: f64 = 1e-12;
/// Consecutive degenerate pivots after which entering variables are chosen by Bland's rule.
const DEGENERATE_SWITCH: usize = 50;
const MAX_PIVOTS: usize = 200_000;

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows` constraint rows followed by one objective row; the last column is the rhs.
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Columns that may never enter the basis.
    blocked: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let inv = 1.0 / self.at(pr, pc);
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].iter().map(|v| v * inv).collect();
        let update = |(r, row): (usize, &mut [f64])| {
            if r == pr {
                row.copy_from_slice(&pivot_row);
                return;
            }
            let f = row[pc];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
            }
        };
        if self.data.len() > 1 << 16 {
            self.data.par_chunks_mut(w).enumerate().for_each(update);
        } else {
            self.data.chunks_mut(w).enumerate().for_each(update);
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Minimizes the objective row (stored as reduced costs `z_j - c_j` of a max problem)
    /// until no column improves.
    fn optimize(&mut self) -> Result<()> {
        let obj = self.rows;
        let mut degenerate_run = 0;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::NoConvergence("simplex pivot limit reached".into()));
            }
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let mut entering = None;
            let mut best = -COST_TOL;
            for c in 0..self.cols {
                if self.blocked[c] {
                    continue;
                }
                let rc = self.at(obj, c);
                if rc < best {
                    entering = Some(c);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };
            // Harris ratio test: relax the bound slightly, then take the largest pivot
            // element among rows within it (or the lowest basis index under Bland's rule).
            let mut bound = f64::INFINITY;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    bound = bound.min((self.rhs(r).max(0.0) + HARRIS_TOL) / a);
                }
            }
            if bound == f64::INFINITY {
                return Err(Error::NoConvergence("linear program is unbounded".into()));
            }
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL && self.rhs(r).max(0.0) / a <= bound {
                    let better = match leaving {
                        None => true,
                        Some((lr, la)) if bland => self.basis[r] < self.basis[lr] && a >= 1e-3 * la,
                        Some((_, la)) => a > la,
                    };
                    if better {
                        leaving = Some((r, a));
                    }
                }
            }
            let (pr, a) = leaving.expect("the bound is attained by some row");
            let ratio = self.rhs(pr).max(0.0) / a;
            degenerate_run = if ratio <= 1e-14 { degenerate_run + 1 } else { 0 };
            self.pivot(pr, pc);
        }
    }
}

/// Solves a [`LinearProgram`] with the two-phase simplex method.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.c.len();
    let m_eq = lp.b_eq.len();
    let m_ub = lp.b_ub.len();
    if lp.a_eq.dim() != (m_eq, n) || lp.a_ub.dim() != (m_ub, n) {
        return Err(Error::DomainViolation("constraint shapes do not match".into()));
    }
    // columns: x (n), slacks (m_ub), artificials (m_eq plus ub rows with negative rhs)
    let rows = m_eq + m_ub;
    let negative_ub: Vec<usize> = (0..m_ub).filter(|&i| lp.b_ub[i] < 0.0).collect();
    let n_art = m_eq + negative_ub.len();
    let cols = n + m_ub + n_art;
    let w = cols + 1;
    let mut data = vec![0.0; (rows + 1) * w];
    let mut basis = vec![0; rows];
    let mut art_of_row = vec![None; rows];
    for i in 0..m_eq {
        let sign = if lp.b_eq[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            data[i * w + j] = sign * lp.a_eq[[i, j]];
        }
        data[i * w + cols] = sign * lp.b_eq[i];
        let a = n + m_ub + i;
        data[i * w + a] = 1.0;
        basis[i] = a;
        art_of_row[i] = Some(a);
    }
    let mut next_art = n + m_ub + m_eq;
    for i in 0..m_ub {
        let r = m_eq + i;
        let sign = if lp.b_ub[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            data[r * w + j] = sign * lp.a_ub[[i, j]];
        }
        data[r * w + n + i] = sign;
        data[r * w + cols] = sign * lp.b_ub[i];
        if sign > 0.0 {
            basis[r] = n + i;
        } else {
            data[r * w + next_art] = 1.0;
            basis[r] = next_art;
            art_of_row[r] = Some(next_art);
            next_art += 1;
        }
    }
    let mut t = Tableau {
        rows,
        cols,
        data,
        basis,
        blocked: vec![false; cols],
        pivots: 0,
    };

    // phase 1: maximize -sum(artificials); objective row = -(sum of rows holding one)
    if n_art > 0 {
        let obj = rows * w;
        for r in 0..rows {
            if art_of_row[r].is_some() {
                for c in 0..w {
                    t.data[obj + c] -= t.data[r * w + c];
                }
            }
        }
        for a in (n + m_ub)..cols {
            t.data[obj + a] = 0.0;
        }
        t.optimize()?;
        let infeasibility = -t.rhs(rows);
        if infeasibility > 1e-9 {
            return Err(Error::Infeasible(format!("phase one ends at {infeasibility:e}")));
        }
        for a in (n + m_ub)..cols {
            t.blocked[a] = true;
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..rows {
            if t.basis[r] >= n + m_ub {
                if let Some(c) = (0..n + m_ub).find(|&c| t.at(r, c).abs() > PIVOT_TOL) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // phase 2 objective row: z_j - c_j expressed in the current basis
    let obj = rows * w;
    for c in 0..w {
        t.data[obj + c] = 0.0;
    }
    for j in 0..n {
        t.data[obj + j] = -lp.c[j];
    }
    for r in 0..rows {
        let b = t.basis[r];
        let cb = if b < n { lp.c[b] } else { 0.0 };
        if cb != 0.0 {
            for c in 0..w {
                t.data[obj + c] += cb * t.data[r * w + c];
            }
        }
    }
    t.optimize()?;

    let mut x = vec![0.0; n];
    for r in 0..rows {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    // duals from the reduced costs of the columns that started as identity columns
    let mut y_eq = vec![0.0; m_eq];
    for (i, y) in y_eq.iter_mut().enumerate() {
        let sign = if lp.b_eq[i] < 0.0 { -1.0 } else { 1.0 };
        *y = sign * t.at(rows, n + m_ub + i);
    }
    let y_ub: Vec<f64> = (0..m_ub).map(|i| t.at(rows, n + i)).collect();
    let objective = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    let certificate = certify(lp, &x, &y_eq, &y_ub);
    Ok(LpSolution {
        x,
        objective,
        y_eq,
        y_ub,
        certificate,
        pivots: t.pivots,
    })
}

/// Primal feasibility, dual feasibility and duality gap for `(x, y)`.
pub fn certify(lp: &LinearProgram, x: &[f64], y_eq: &[f64], y_ub: &[f64]) -> KktCertificate {
    let mut primal: f64 = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
    for (i, row) in lp.a_eq.rows().into_iter().enumerate() {
        let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        primal = primal.max((lhs - lp.b_eq[i]).abs());
    }
    for (i, row) in lp.a_ub.rows().into_iter().enumerate() {
        let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
        primal = primal.max(lhs - lp.b_ub[i]);
    }
    let mut dual: f64 = y_ub.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
    for j in 0..lp.c.len() {
        let aty: f64 = lp.a_eq.column(j).iter().zip(y_eq).map(|(a, y)| a * y).sum::<f64>()
            + lp.a_ub.column(j).iter().zip(y_ub).map(|(a, y)| a * y).sum::<f64>();
        dual = dual.max(lp.c[j] - aty);
    }
    let primal_value: f64 = lp.c.iter().zip(x).map(|(c, v)| c * v).sum();
    let dual_value: f64 = lp.b_eq.iter().zip(y_eq).map(|(b, y)| b * y).sum::<f64>()
        + lp.b_ub.iter().zip(y_ub).map(|(b, y)| b * y).sum::<f64>();
    KktCertificate {
        primal_residual: primal.max(0.0),
        dual_residual: dual.max(0.0),
        duality_gap: (primal_value - dual_value).abs(),
    }
}

/// Optimal direct persuasive scheme for a receiver who knows the scheme.
#[derive(Debug, Clone)]
pub struct DesignSolution {
    pub scheme: JointScheme,
    pub objective: f64,
    pub certificate: KktCertificate,
}

/// Certificate residual accepted as optimal.
pub const KKT_TOLERANCE: f64 = 1e-7;

pub fn solve_known_commitment_lp(game: &PersuasionGame) -> Result<DesignSolution> {
    let set = FeasibleSet::new(game);
    let (n, m) = (game.n_states(), game.n_actions());
    let lp = LinearProgram {
        c: game.u_sender().iter().copied().collect(),
        a_eq: set.marginal_matrix(),
        b_eq: game.prior().probs().to_vec(),
        a_ub: set.persuasion_matrix().mapv(|v| -v),
        b_ub: vec![0.0; set.n_persuasion_rows()],
    };
    let solution = solve_lp(&lp)?;
    if solution.certificate.max_residual() > KKT_TOLERANCE {
        return Err(Error::NoConvergence(format!(
            "simplex certificate residual {:e} above {KKT_TOLERANCE:e}",
            solution.certificate.max_residual()
        )));
    }
    let mut x = Array2::from_shape_vec((n, m), solution.x).expect("shape");
    // exact marginals: push the rounding error of each row onto its largest entry
    for (state, mut row) in x.rows_mut().into_iter().enumerate() {
        let err = game.prior()[state] - row.sum();
        let (best, _) = row.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| {
            if v > acc.1 { (i, v) } else { acc }
        });
        row[best] = (row[best] + err).max(0.0);
    }
    let scheme = JointScheme::for_game(game, x)?;
    Ok(DesignSolution {
        scheme,
        objective: solution.objective,
        certificate: solution.certificate,
    })
}
