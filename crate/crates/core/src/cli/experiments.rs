//! The experiment kinds behind `persuade run`.
//!
//! Every random choice derives from the config's master seed through fixed stream
//! indices, and independent points run on the rayon pool but are collected in config
//! order, so reruns produce identical bytes regardless of thread count.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{BoundsTable, ExperimentConfig, FlowerCompare, RandomGames, Safety, StackelbergGap};
use super::output::RunDir;
use crate::bounds::{entropy_gap_bound, flower_lower_bound_reference, gap_upper_bound, stackelberg_sufficient_k};
use crate::error::{Error, Result};
use crate::games::{
    flower_game, flower_stackelberg, half_value_tau, random_game, random_interior_scheme, safety_alert_game,
    signal_reward_decomposition, signal_support_metric, stackelberg_eps_strategy, SafetyCity,
};
use crate::inference::{ir_k_monte_carlo, stackelberg_ir_k, IrEstimate};
use crate::model::{bpr, JointScheme, PersuasionGame, SchemeFile};
use crate::rng::RngSpec;
use crate::solvers::{br_optimize, sgd_optimize, solve_known_commitment_lp, IterateRecord, OptimizerConfig};
use crate::TOOL_VERSION;

// Top-level stream indices under the master seed.
const GAME_STREAM: u64 = 1;
const OPTIMIZER_STREAM: u64 = 2;
const EVAL_STREAM: u64 = 3;
const SCHEME_STREAM: u64 = 4;

/// Seed for an optimizer's own random stream, derived from the master seed.
fn optimizer_seed(master: u64, index: u64) -> u64 {
    RngSpec::new(master).child(OPTIMIZER_STREAM).child(index).stream_id
}

/// Runs the experiment and returns the finished result directory.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    let dir = RunDir::create(out)?;
    dir.write_text("config.toml", &config.to_toml())?;
    match config {
        ExperimentConfig::FlowerCompare(c) => flower_compare(c, &dir)?,
        ExperimentConfig::RandomGames(c) => random_games(c, &dir)?,
        ExperimentConfig::Safety(c) => safety(c, &dir)?,
        ExperimentConfig::BoundsTable(c) => bounds_table(c, &dir)?,
        ExperimentConfig::StackelbergGap(c) => stackelberg_gap(c, &dir)?,
    }
    dir.finish()
}

#[derive(Debug, Clone, Serialize)]
pub struct IrRow {
    pub method: String,
    pub k: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub bpr: f64,
    pub master_seed: u64,
    pub n_replicates: u64,
    pub tool_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct HistoryRow {
    pub method: String,
    pub iter: u64,
    pub objective_estimate: f64,
    pub std_error: f64,
    pub constraint_residual: f64,
    pub master_seed: u64,
    pub n_replicates: u64,
    pub tool_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
struct NamedScheme {
    method: String,
    bpr: f64,
    scheme: SchemeFile,
}

struct Design {
    method: String,
    scheme: JointScheme,
    history: Vec<IterateRecord>,
    batch_size: u64,
}

fn lp_design(game: &PersuasionGame) -> Result<Design> {
    let lp = solve_known_commitment_lp(game)?;
    Ok(Design {
        method: "lp".into(),
        scheme: lp.scheme,
        history: Vec::new(),
        batch_size: 0,
    })
}

fn br_design(game: &PersuasionGame, lambda: f64, config: &OptimizerConfig) -> Result<Design> {
    let result = br_optimize(game, lambda, config)?;
    Ok(Design {
        method: format!("br_lambda_{lambda}"),
        scheme: result.scheme,
        history: result.history,
        batch_size: 0,
    })
}

fn sgd_design(game: &PersuasionGame, config: &OptimizerConfig) -> Result<Design> {
    let result = sgd_optimize(game, config)?;
    Ok(Design {
        method: format!("sgd_kopt_{}", config.k_opt),
        scheme: result.scheme,
        history: result.history,
        batch_size: config.batch_size,
    })
}

/// IR_k for every design at every k. All designs share one stream per k, so method
/// differences are not blurred by independent noise.
fn evaluate(
    game: &PersuasionGame,
    designs: &[Design],
    k_grid: &[u64],
    replicates: u64,
    eval: &RngSpec,
) -> Result<Vec<(usize, u64, IrEstimate)>> {
    let points: Vec<(usize, u64)> = (0..designs.len())
        .flat_map(|d| k_grid.iter().map(move |&k| (d, k)))
        .collect();
    points
        .par_iter()
        .map(|&(d, k)| {
            ir_k_monte_carlo(game, &designs[d].scheme, k, replicates, &eval.child(k)).map(|e| (d, k, e))
        })
        .collect()
}

fn ir_rows(
    game: &PersuasionGame,
    designs: &[Design],
    values: &[(usize, u64, IrEstimate)],
    master_seed: u64,
) -> Vec<IrRow> {
    values
        .iter()
        .map(|&(d, k, e)| IrRow {
            method: designs[d].method.clone(),
            k,
            estimate: e.estimate,
            std_error: e.std_error,
            bpr: bpr(game, &designs[d].scheme),
            master_seed,
            n_replicates: e.n_replicates,
            tool_version: TOOL_VERSION,
        })
        .collect()
}

fn history_rows(designs: &[Design], master_seed: u64) -> Vec<HistoryRow> {
    designs
        .iter()
        .flat_map(|d| {
            d.history.iter().map(move |h| HistoryRow {
                method: d.method.clone(),
                iter: h.iter,
                objective_estimate: h.objective_estimate,
                std_error: h.std_error,
                constraint_residual: h.constraint_residual,
                master_seed,
                n_replicates: d.batch_size,
                tool_version: TOOL_VERSION,
            })
        })
        .collect()
}

fn named_schemes(game: &PersuasionGame, designs: &[Design]) -> Vec<NamedScheme> {
    designs
        .iter()
        .map(|d| NamedScheme {
            method: d.method.clone(),
            bpr: bpr(game, &d.scheme),
            scheme: d.scheme.clone().into(),
        })
        .collect()
}

fn flower_compare(c: &FlowerCompare, dir: &RunDir) -> Result<()> {
    let game = flower_game(c.n, c.tau)?;
    let mut jobs: Vec<Box<dyn Fn() -> Result<Design> + Sync + '_>> = vec![Box::new(|| lp_design(&game))];
    for (i, &k_opt) in c.sgd_k_opt.iter().enumerate() {
        let config = OptimizerConfig {
            k_opt,
            master_seed: optimizer_seed(c.master_seed, i as u64),
            ..c.sgd.clone()
        };
        let game = &game;
        jobs.push(Box::new(move || sgd_design(game, &config)));
    }
    for &lambda in &c.br_lambda {
        let game = &game;
        jobs.push(Box::new(move || br_design(game, lambda, &c.br)));
    }
    let designs: Vec<Design> = jobs.par_iter().map(|job| job()).collect::<Result<_>>()?;
    let eval = RngSpec::new(c.master_seed).child(EVAL_STREAM);
    let values = evaluate(&game, &designs, &c.k_grid, c.replicates, &eval)?;

    dir.write_json("game.json", &game)?;
    dir.write_json("schemes.json", &named_schemes(&game, &designs))?;
    dir.write_csv("ir_k.csv", &ir_rows(&game, &designs, &values, c.master_seed))?;
    dir.write_csv("history.csv", &history_rows(&designs, c.master_seed))
}

#[derive(Debug, Clone, Serialize)]
pub struct GameIrRow {
    pub game: usize,
    pub method: String,
    pub k: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub bpr: f64,
    pub master_seed: u64,
    pub n_replicates: u64,
    pub tool_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub method: String,
    pub k: u64,
    pub mean_estimate: f64,
    /// Monte Carlo error of the mean, treating the games as fixed.
    pub std_error: f64,
    pub mean_bpr: f64,
    pub n_games: usize,
    pub master_seed: u64,
    pub n_replicates: u64,
    pub tool_version: &'static str,
}

fn random_games(c: &RandomGames, dir: &RunDir) -> Result<()> {
    let root = RngSpec::new(c.master_seed);
    let per_game: Vec<Vec<GameIrRow>> = (0..c.n_games)
        .into_par_iter()
        .map(|g| -> Result<Vec<GameIrRow>> {
            let game = random_game(c.n_states, c.n_actions, &root.child(GAME_STREAM).child(g as u64))?;
            let mut designs = vec![lp_design(&game)?];
            for &lambda in &c.lambdas {
                designs.push(br_design(&game, lambda, &c.br)?);
            }
            let eval = root.child(EVAL_STREAM).child(g as u64);
            let values = evaluate(&game, &designs, &c.k_grid, c.replicates, &eval)?;
            Ok(ir_rows(&game, &designs, &values, c.master_seed)
                .into_iter()
                .map(|r| GameIrRow {
                    game: g,
                    method: r.method,
                    k: r.k,
                    estimate: r.estimate,
                    std_error: r.std_error,
                    bpr: r.bpr,
                    master_seed: r.master_seed,
                    n_replicates: r.n_replicates,
                    tool_version: TOOL_VERSION,
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    // every game lists the same methods and k values in the same order
    let n = c.n_games as f64;
    let aggregate: Vec<AggregateRow> = (0..per_game[0].len())
        .map(|i| {
            let rows: Vec<&GameIrRow> = per_game.iter().map(|g| &g[i]).collect();
            AggregateRow {
                method: rows[0].method.clone(),
                k: rows[0].k,
                mean_estimate: rows.iter().map(|r| r.estimate).sum::<f64>() / n,
                std_error: rows.iter().map(|r| r.std_error * r.std_error).sum::<f64>().sqrt() / n,
                mean_bpr: rows.iter().map(|r| r.bpr).sum::<f64>() / n,
                n_games: c.n_games,
                master_seed: c.master_seed,
                n_replicates: c.replicates,
                tool_version: TOOL_VERSION,
            }
        })
        .collect();
    let flat: Vec<GameIrRow> = per_game.into_iter().flatten().collect();
    dir.write_csv("ir_k_per_game.csv", &flat)?;
    dir.write_csv("ir_k_mean.csv", &aggregate)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionRow {
    pub method: String,
    pub signal: usize,
    pub contribution: f64,
    /// Rank of the signal by contribution, largest first.
    pub rank: usize,
    pub master_seed: u64,
    pub n_replicates: u64,
    pub tool_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SafetySummary {
    pub method: String,
    pub bpr: f64,
    pub support_metric: Option<usize>,
    pub k: u64,
    pub ir_k: IrEstimate,
}

fn safety(c: &Safety, dir: &RunDir) -> Result<()> {
    let root = RngSpec::new(c.master_seed);
    let city = SafetyCity::random(&c.city, &root.child(GAME_STREAM))?;
    let game = safety_alert_game(&city)?;
    let sgd = OptimizerConfig {
        master_seed: optimizer_seed(c.master_seed, 0),
        ..c.sgd.clone()
    };
    let designs = vec![lp_design(&game)?, sgd_design(&game, &sgd)?];
    let values = evaluate(&game, &designs, &[c.k], c.replicates, &root.child(EVAL_STREAM))?;

    let mut decomposition = Vec::new();
    let mut summary = Vec::new();
    for (d, design) in designs.iter().enumerate() {
        let parts = signal_reward_decomposition(&game, &design.scheme);
        let mut order: Vec<usize> = (0..parts.len()).collect();
        order.sort_by(|&a, &b| parts[b].total_cmp(&parts[a]).then(a.cmp(&b)));
        let mut rank = vec![0; parts.len()];
        for (r, &s) in order.iter().enumerate() {
            rank[s] = r + 1;
        }
        decomposition.extend(parts.iter().enumerate().map(|(s, &contribution)| DecompositionRow {
            method: design.method.clone(),
            signal: s,
            contribution,
            rank: rank[s],
            master_seed: c.master_seed,
            n_replicates: c.replicates,
            tool_version: TOOL_VERSION,
        }));
        summary.push(SafetySummary {
            method: design.method.clone(),
            bpr: bpr(&game, &design.scheme),
            support_metric: signal_support_metric(&game, &design.scheme).ok(),
            k: c.k,
            ir_k: values[d].2,
        });
    }

    dir.write_json("city.json", &city)?;
    dir.write_json("game.json", &game)?;
    dir.write_json("schemes.json", &named_schemes(&game, &designs))?;
    dir.write_csv("decomposition.csv", &decomposition)?;
    dir.write_json("summary.json", &summary)?;
    dir.write_csv("history.csv", &history_rows(&designs, c.master_seed))
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub game: usize,
    pub game_seed_stream: u64,
    pub scheme: String,
    pub k: u64,
    pub bpr: f64,
    pub measured_irk: f64,
    pub std_error: f64,
    pub gap: f64,
    pub bound: f64,
    pub entropy_bound: f64,
    pub master_seed: u64,
    pub n_replicates: u64,
    pub tool_version: &'static str,
}

/// Interior schemes are redrawn from fresh game seeds until this many attempts per
/// requested game have been spent.
const MAX_GAME_ATTEMPTS: usize = 20;
const INTERIOR_DRAWS: usize = 2000;

/// Games with an interior scheme, in seed order: `(game index, stream, game, scheme)`.
pub fn interior_instances(
    master_seed: u64,
    n_games: usize,
    n_states: usize,
    n_actions: usize,
    n_signals: usize,
    min_distance: f64,
) -> Result<Vec<(u64, PersuasionGame, JointScheme)>> {
    let root = RngSpec::new(master_seed);
    let candidates: Vec<Option<(u64, PersuasionGame, JointScheme)>> = (0..(n_games * MAX_GAME_ATTEMPTS) as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<_>> {
            let game = random_game(n_states, n_actions, &root.child(GAME_STREAM).child(i))?;
            match random_interior_scheme(&game, n_signals, min_distance, INTERIOR_DRAWS, &root.child(SCHEME_STREAM).child(i)) {
                Ok(scheme) => Ok(Some((i, game, scheme))),
                Err(Error::NoConvergence(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let found: Vec<_> = candidates.into_iter().flatten().take(n_games).collect();
    if found.len() < n_games {
        return Err(Error::NoConvergence(format!(
            "only {} of {n_games} games admit a scheme at boundary distance {min_distance}",
            found.len()
        )));
    }
    Ok(found)
}

fn bounds_table(c: &BoundsTable, dir: &RunDir) -> Result<()> {
    let instances = interior_instances(
        c.master_seed,
        c.n_games,
        c.n_states,
        c.n_actions,
        c.n_signals,
        c.min_boundary_distance,
    )?;
    let root = RngSpec::new(c.master_seed);
    let rows: Vec<Vec<BoundRow>> = instances
        .par_iter()
        .enumerate()
        .map(|(g, (stream, game, interior))| -> Result<Vec<BoundRow>> {
            let lp = solve_known_commitment_lp(game)?.scheme;
            let eval = root.child(EVAL_STREAM).child(*stream);
            let mut rows = Vec::new();
            for (name, scheme) in [("interior", interior), ("lp", &lp)] {
                let value = bpr(game, scheme);
                let entropy_bound = entropy_gap_bound(game, scheme)?;
                for &k in &c.k_grid {
                    let e = ir_k_monte_carlo(game, scheme, k, c.replicates, &eval.child(k))?;
                    rows.push(BoundRow {
                        game: g,
                        game_seed_stream: *stream,
                        scheme: name.into(),
                        k,
                        bpr: value,
                        measured_irk: e.estimate,
                        std_error: e.std_error,
                        gap: value - e.estimate,
                        bound: gap_upper_bound(game, scheme, k)?,
                        entropy_bound,
                        master_seed: c.master_seed,
                        n_replicates: c.replicates,
                        tool_version: TOOL_VERSION,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<BoundRow> = rows.into_iter().flatten().collect();
    dir.write_csv("bounds.csv", &rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct StackelbergRow {
    pub n: usize,
    pub eps: f64,
    pub tau: f64,
    pub target: f64,
    /// Flower lower-bound reference; empty outside its domain.
    pub reference_k: Option<f64>,
    pub sufficient_k: u64,
    pub irk_at_sufficient: f64,
    pub std_error_at_sufficient: f64,
    /// Smallest grid k whose estimate reaches the target; empty if none does.
    pub measured_k: Option<u64>,
    pub master_seed: u64,
    pub n_replicates: u64,
    pub tool_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct StackelbergCurveRow {
    pub n: usize,
    pub eps: f64,
    pub k: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub master_seed: u64,
    pub n_replicates: u64,
    pub tool_version: &'static str,
}

fn stackelberg_gap(c: &StackelbergGap, dir: &RunDir) -> Result<()> {
    let root = RngSpec::new(c.master_seed);
    let cases: Vec<(usize, usize, f64)> = c
        .n_values
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| c.eps_values.iter().map(move |&eps| (i, n, eps)))
        .collect();
    let results: Vec<(StackelbergRow, Vec<StackelbergCurveRow>)> = cases
        .par_iter()
        .enumerate()
        .map(|(case, &(_, n, eps))| -> Result<_> {
            let tau = half_value_tau(n);
            let game = flower_stackelberg(n, tau)?;
            let strategy = stackelberg_eps_strategy(n, eps)?;
            let target = 0.5 - eps;
            let eval = root.child(EVAL_STREAM).child(case as u64);
            let sufficient_k = stackelberg_sufficient_k(n, eps)?;
            let at_sufficient = stackelberg_ir_k(&game, &strategy, sufficient_k, c.replicates, &eval.child(sufficient_k))?;
            let mut curve = Vec::new();
            for &k in &c.k_grid {
                let e = stackelberg_ir_k(&game, &strategy, k, c.replicates, &eval.child(k))?;
                curve.push(StackelbergCurveRow {
                    n,
                    eps,
                    k,
                    estimate: e.estimate,
                    std_error: e.std_error,
                    master_seed: c.master_seed,
                    n_replicates: c.replicates,
                    tool_version: TOOL_VERSION,
                });
            }
            let measured_k = curve.iter().find(|r| r.estimate >= target).map(|r| r.k);
            let row = StackelbergRow {
                n,
                eps,
                tau,
                target,
                reference_k: flower_lower_bound_reference(n, eps).ok(),
                sufficient_k,
                irk_at_sufficient: at_sufficient.estimate,
                std_error_at_sufficient: at_sufficient.std_error,
                measured_k,
                master_seed: c.master_seed,
                n_replicates: c.replicates,
                tool_version: TOOL_VERSION,
            };
            Ok((row, curve))
        })
        .collect::<Result<_>>()?;
    let (rows, curves): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let curves: Vec<StackelbergCurveRow> = curves.into_iter().flatten().collect();
    dir.write_csv("stackelberg.csv", &rows)?;
    dir.write_csv("stackelberg_curve.csv", &curves)
}
