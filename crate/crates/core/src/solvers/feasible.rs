//! The polytope of direct persuasive schemes and Euclidean projection onto it.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus, ZeroConeT};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{JointScheme, PersuasionGame};

/// Inputs already this close to the set are returned unchanged by [`project_feasible`].
pub const FEASIBLE_TOLERANCE: f64 = 1e-9;

/// Direct schemes (one signal per action) that match the prior and recommend best
/// responses: `x >= 0`, `sum_a x[w, a] = prior[w]`, and
/// `sum_w x[w, a] (u_R(w, a) - u_R(w, b)) >= 0` for every `b != a`.
///
/// Tables are flattened row-major, index `w * n_actions + a`.
#[derive(Debug, Clone)]
pub struct FeasibleSet<'a> {
    game: &'a PersuasionGame,
    /// `(a, b)` for every persuasiveness row.
    pairs: Vec<(usize, usize)>,
}

impl<'a> FeasibleSet<'a> {
    pub fn new(game: &'a PersuasionGame) -> Self {
        let m = game.n_actions();
        let pairs = (0..m)
            .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        FeasibleSet { game, pairs }
    }

    pub fn game(&self) -> &PersuasionGame {
        self.game
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.game.n_states(), self.game.n_actions())
    }

    pub fn n_persuasion_rows(&self) -> usize {
        self.pairs.len()
    }

    /// `n_states x (n_states * n_actions)` row-sum operator.
    pub fn marginal_matrix(&self) -> Array2<f64> {
        let (n, m) = self.dim();
        Array2::from_shape_fn((n, n * m), |(w, j)| if j / m == w { 1.0 } else { 0.0 })
    }

    /// One row per `(a, b)` pair; feasible points make every row nonnegative.
    pub fn persuasion_matrix(&self) -> Array2<f64> {
        let (n, m) = self.dim();
        let u = self.game.u_receiver();
        let mut d = Array2::zeros((self.pairs.len(), n * m));
        for (row, &(a, b)) in self.pairs.iter().enumerate() {
            for w in 0..n {
                d[[row, w * m + a]] = u[[w, a]] - u[[w, b]];
            }
        }
        d
    }

    /// Largest violation of any constraint.
    pub fn constraint_residual(&self, x: &Array2<f64>) -> f64 {
        let (n, m) = self.dim();
        debug_assert_eq!(x.dim(), (n, m));
        let u = self.game.u_receiver();
        let mut worst: f64 = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        for w in 0..n {
            worst = worst.max((x.row(w).sum() - self.game.prior()[w]).abs());
        }
        for &(a, b) in &self.pairs {
            let margin: f64 = (0..n).map(|w| x[[w, a]] * (u[[w, a]] - u[[w, b]])).sum();
            worst = worst.max(-margin);
        }
        worst
    }

    /// Receiver-optimal action under the prior recommended with certainty: always feasible.
    pub fn uninformative(&self) -> JointScheme {
        let a0 = self.game.best_response(self.game.prior());
        JointScheme::uninformative(self.game, self.game.n_actions(), a0)
    }
}

/// Free function form of [`FeasibleSet::constraint_residual`].
pub fn constraint_residual(game: &PersuasionGame, x: &Array2<f64>) -> f64 {
    FeasibleSet::new(game).constraint_residual(x)
}

/// Nearest point of the set to `x_raw` in Euclidean norm, solved as a sparse quadratic
/// program by an interior-point method.
pub fn project_feasible(x_raw: &Array2<f64>, set: &FeasibleSet) -> Result<JointScheme> {
    let (n, m) = set.dim();
    if x_raw.dim() != (n, m) {
        return Err(Error::InvalidScheme(format!("expected a {n}x{m} table, got {:?}", x_raw.dim())));
    }
    if x_raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidScheme("non-finite entry".into()));
    }
    if set.constraint_residual(x_raw) <= FEASIBLE_TOLERANCE {
        return finish(x_raw.clone(), set);
    }
    let dim = n * m;
    let u = set.game.u_receiver();

    // rows: marginals (zero cone), then -x <= 0 and -D x <= 0 (nonnegative cone)
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut b = Vec::new();
    for w in 0..n {
        for a in 0..m {
            rows.push(w);
            cols.push(w * m + a);
            vals.push(1.0);
        }
        b.push(set.game.prior()[w]);
    }
    let mut r = n;
    for j in 0..dim {
        rows.push(r);
        cols.push(j);
        vals.push(-1.0);
        b.push(0.0);
        r += 1;
    }
    for &(a, bb) in &set.pairs {
        let mut any = false;
        for w in 0..n {
            let d = u[[w, a]] - u[[w, bb]];
            if d != 0.0 {
                rows.push(r);
                cols.push(w * m + a);
                vals.push(-d);
                any = true;
            }
        }
        if any {
            b.push(0.0);
            r += 1;
        }
    }
    let n_ineq = r - n;
    let a_mat = CscMatrix::new_from_triplets(r, dim, rows, cols, vals);
    let p_mat = CscMatrix::identity(dim);
    let q: Vec<f64> = x_raw.iter().map(|v| -v).collect();
    let cones = [ZeroConeT(n), NonnegativeConeT(n_ineq)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(200)
        .tol_gap_abs(1e-11)
        .tol_gap_rel(1e-11)
        .tol_feas(1e-11)
        .tol_ktratio(1e-9)
        .max_threads(1)
        .build()
        .expect("valid solver settings");
    let mut solver = DefaultSolver::new(&p_mat, &q, &a_mat, &b, &cones, settings)
        .map_err(|e| Error::NoConvergence(format!("projection setup failed: {e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            return Err(Error::Infeasible("feasible set is empty".into()));
        }
        other => return Err(Error::NoConvergence(format!("projection solver stopped with {other:?}"))),
    }
    let x = Array2::from_shape_vec((n, m), solver.solution.x.clone()).expect("shape");
    finish(x, set)
}

/// Clears rounding noise: negatives to zero, rows rescaled to the prior.
fn finish(mut x: Array2<f64>, set: &FeasibleSet) -> Result<JointScheme> {
    for (w, mut row) in x.rows_mut().into_iter().enumerate() {
        row.mapv_inplace(|v| v.max(0.0));
        let total = row.sum();
        let target = set.game.prior()[w];
        if total > 0.0 {
            row.mapv_inplace(|v| v * target / total);
        } else if target > 0.0 {
            return Err(Error::NoConvergence(format!("projection lost the mass of state {w}")));
        }
    }
    let residual = set.constraint_residual(&x);
    if residual > 1e-7 {
        return Err(Error::NoConvergence(format!("projection residual {residual:e}")));
    }
    JointScheme::for_game(set.game, x)
}
