//! Randomized invariants across the model, the projection and the design LP.

use ndarray::Array2;
use persuasion::cli::log_spaced;
use persuasion::games::random_game;
use persuasion::inference::ir_k_monte_carlo;
use persuasion::solvers::{constraint_residual, project_feasible, solve_known_commitment_lp, FeasibleSet};
use persuasion::{bpr, RngSpec};
use proptest::prelude::*;

fn raw_table(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    proptest::collection::vec(-0.5..1.0f64, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_is_feasible_and_idempotent(seed in 0u64..1000, raw in raw_table(3, 3)) {
        let game = random_game(3, 3, &RngSpec::new(seed)).unwrap();
        let set = FeasibleSet::new(&game);
        let projected = project_feasible(&raw, &set).unwrap();
        prop_assert!(constraint_residual(&game, projected.x()) <= 1e-7);
        let again = project_feasible(projected.x(), &set).unwrap();
        let moved = (again.x() - projected.x()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(moved <= 1e-6, "moved {}", moved);
    }

    #[test]
    fn lp_dominates_every_persuasive_scheme(seed in 0u64..1000, raw in raw_table(3, 4)) {
        let game = random_game(3, 4, &RngSpec::new(seed)).unwrap();
        let lp = solve_known_commitment_lp(&game).unwrap();
        let other = project_feasible(&raw, &FeasibleSet::new(&game)).unwrap();
        prop_assert!(bpr(&game, &other) <= lp.objective + 1e-6);
        prop_assert!((bpr(&game, &lp.scheme) - lp.objective).abs() <= 1e-7);
    }

    #[test]
    fn best_response_ignores_scale(seed in 0u64..1000, w in proptest::collection::vec(0.0..1.0f64, 4), scale in 0.01..100.0f64) {
        let game = random_game(4, 5, &RngSpec::new(seed)).unwrap();
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let scaled: Vec<f64> = w.iter().map(|v| v * scale).collect();
        prop_assert_eq!(game.best_response_weighted(&w), game.best_response_weighted(&scaled));
    }

    #[test]
    fn round_values_stay_in_sender_range(seed in 0u64..1000, raw in raw_table(2, 3), k in 1u64..50) {
        let game = random_game(2, 3, &RngSpec::new(seed)).unwrap();
        let scheme = project_feasible(&raw, &FeasibleSet::new(&game)).unwrap();
        let e = ir_k_monte_carlo(&game, &scheme, k, 200, &RngSpec::new(seed)).unwrap();
        let lo = game.u_sender().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = game.u_sender().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(e.estimate >= lo - 1e-12 && e.estimate <= hi + 1e-12);
    }

    #[test]
    fn log_grids_are_increasing(hi in 2u64..1_000_000, per in 1usize..8) {
        let grid = log_spaced(1, hi, per);
        prop_assert_eq!(grid[0], 1);
        prop_assert_eq!(*grid.last().unwrap(), hi);
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}
