//! Argument parsing and the single-shot subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiments::{run_experiment, HistoryRow};
use super::output::{print_csv, write_csv};
use crate::bounds::gap_upper_bound;
use crate::error::{Error, Result};
use crate::games::{flower_game, random_game, safety_alert_game, CityParams, SafetyCity};
use crate::inference::{ir_k_exact, ir_k_monte_carlo};
use crate::model::{bpr, JointScheme, PersuasionGame};
use crate::rng::RngSpec;
use crate::solvers::{
    br_optimize, sgd_optimize, solve_known_commitment_lp, IterateRecord, KktCertificate, OptimizerConfig,
    StepSchedule,
};
use crate::TOOL_VERSION;

/// Overrides the base directory of `run` outputs.
pub const OUT_DIR_ENV: &str = "PERSUADE_OUT_DIR";
/// Sets the size of the worker pool.
pub const THREADS_ENV: &str = "PERSUADE_THREADS";

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "persuade", version, about = "Persuasion experiments with a receiver who learns the scheme")]
pub struct Cli {
    /// Master seed for every random stream of this invocation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a game (and for `safety`, its city) as JSON.
    GenGame(GenGameArgs),
    /// Solve the known-commitment design LP for a game.
    SolveLp(SolveLpArgs),
    /// Optimize the round-k value by projected stochastic gradient ascent.
    OptimizeSgd(OptimizeArgs),
    /// Optimize against a quantal-response receiver.
    OptimizeBr(OptimizeBrArgs),
    /// Estimate round-k values of a scheme.
    Simulate(SimulateArgs),
    /// Gap bounds next to measured values.
    Bounds(BoundsArgs),
    /// Run an experiment described by a TOML config.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Family {
    Flower,
    Random,
    Safety,
}

#[derive(Debug, Args)]
pub struct GenGameArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Flower size.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Flower petal offset; defaults to 1/(2(n-1)).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub states: usize,
    #[arg(long, default_value_t = 3)]
    pub actions: usize,
    #[arg(long, default_value_t = 40)]
    pub nodes: usize,
    #[arg(long, default_value_t = 20)]
    pub incidents: usize,
    #[arg(long, default_value_t = 10)]
    pub incident_size: usize,
    /// Game JSON destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// City JSON destination for the safety family.
    #[arg(long)]
    pub city_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveLpArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub game: PathBuf,
    /// TOML optimizer settings; flags below override individual fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k_opt: Option<u64>,
    #[arg(long)]
    pub iters: Option<u64>,
    #[arg(long)]
    pub batch: Option<u64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeBrArgs {
    #[command(flatten)]
    pub common: OptimizeArgs,
    /// Rationality constant; `inf` for a fully rational receiver.
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub game: PathBuf,
    /// Scheme JSON; either `{"x": ...}` or the output of an optimizer.
    #[arg(long)]
    pub scheme: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub k: Vec<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: u64,
    /// Exact enumeration instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub game: PathBuf,
    #[arg(long)]
    pub scheme: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    pub k: Vec<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Result directory; defaults to `<base>/<kind>-seed<seed>` with the base taken from
    /// the output-directory environment variable or `results`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config(THREADS_ENV, format!("expected a positive integer, got `{raw}`")))?;
    // a pool may already exist when called twice in one process; its size then stands
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::GenGame(a) => gen_game(&a, seed.unwrap_or(0)),
        Command::SolveLp(a) => solve_lp_command(&a),
        Command::OptimizeSgd(a) => optimize_sgd(&a, seed),
        Command::OptimizeBr(a) => optimize_br(&a, seed),
        Command::Simulate(a) => simulate(&a, seed.unwrap_or(0)),
        Command::Bounds(a) => bounds(&a, seed.unwrap_or(0)),
        Command::Run(a) => run(&a, seed),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        Error::config(format!("{}:{}", path.display(), e.path()), e.into_inner().to_string())
    })
}

fn load_game(path: &Path) -> Result<PersuasionGame> {
    read_json(path)
}

fn load_scheme(path: &Path, game: &PersuasionGame) -> Result<JointScheme> {
    let value: serde_json::Value = read_json(path)?;
    let inner = value.get("scheme").cloned().unwrap_or(value);
    let scheme: JointScheme = serde_json::from_value(inner)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    scheme
        .check_consistent(game)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    Ok(scheme)
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_csv(path, rows),
        None => print_csv(rows),
    }
}

fn gen_game(a: &GenGameArgs, seed: u64) -> Result<()> {
    let rng = RngSpec::new(seed);
    let game = match a.family {
        Family::Flower => {
            let tau = a.tau.unwrap_or_else(|| crate::games::half_value_tau(a.n));
            flower_game(a.n, tau)?
        }
        Family::Random => random_game(a.states, a.actions, &rng)?,
        Family::Safety => {
            let params = CityParams {
                n_nodes: a.nodes,
                n_incidents: a.incidents,
                incident_size: a.incident_size,
                ..CityParams::default()
            };
            let city = SafetyCity::random(&params, &rng)?;
            if let Some(path) = &a.city_out {
                emit_json(&city, Some(path))?;
            }
            safety_alert_game(&city)?
        }
    };
    emit_json(&game, a.out.as_deref())
}

#[derive(Serialize)]
struct LpOutput {
    objective: f64,
    certificate: KktCertificate,
    scheme: JointScheme,
}

fn solve_lp_command(a: &SolveLpArgs) -> Result<()> {
    let game = load_game(&a.game)?;
    let solution = solve_known_commitment_lp(&game)?;
    emit_json(
        &LpOutput {
            objective: solution.objective,
            certificate: solution.certificate,
            scheme: solution.scheme,
        },
        a.out.as_deref(),
    )
}

#[derive(Serialize)]
struct OptimizeOutput {
    bpr: f64,
    scheme: JointScheme,
    config: OptimizerConfig,
}

fn optimizer_config(a: &OptimizeArgs, base: OptimizerConfig, seed: Option<u64>) -> Result<OptimizerConfig> {
    let mut config = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
            let de = toml::Deserializer::parse(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
            serde_path_to_error::deserialize(de)
                .map_err(|e| Error::config(e.path().to_string(), e.into_inner().to_string()))?
        }
        None => base,
    };
    if let Some(k) = a.k_opt {
        config.k_opt = k;
    }
    if let Some(iters) = a.iters {
        config.max_iters = iters;
    }
    if let Some(batch) = a.batch {
        config.batch_size = batch;
    }
    if let Some(step) = a.step {
        config.step = StepSchedule { initial: step, ..config.step };
    }
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn finish_optimizer(
    game: &PersuasionGame,
    scheme: JointScheme,
    history: &[IterateRecord],
    config: OptimizerConfig,
    method: &str,
    a: &OptimizeArgs,
) -> Result<()> {
    if let Some(path) = &a.history {
        let rows: Vec<HistoryRow> = history
            .iter()
            .map(|h| HistoryRow {
                method: method.to_string(),
                iter: h.iter,
                objective_estimate: h.objective_estimate,
                std_error: h.std_error,
                constraint_residual: h.constraint_residual,
                master_seed: config.master_seed,
                n_replicates: if method == "sgd" { config.batch_size } else { 0 },
                tool_version: TOOL_VERSION,
            })
            .collect();
        write_csv(path, &rows)?;
    }
    emit_json(
        &OptimizeOutput {
            bpr: bpr(game, &scheme),
            scheme,
            config,
        },
        a.out.as_deref(),
    )
}

fn optimize_sgd(a: &OptimizeArgs, seed: Option<u64>) -> Result<()> {
    let game = load_game(&a.game)?;
    let config = optimizer_config(a, OptimizerConfig::sgd_default(), seed)?;
    let result = sgd_optimize(&game, &config)?;
    finish_optimizer(&game, result.scheme, &result.history, config, "sgd", a)
}

fn optimize_br(a: &OptimizeBrArgs, seed: Option<u64>) -> Result<()> {
    if !(a.lambda >= 0.0) {
        return Err(Error::config("lambda", format!("must be nonnegative, got {}", a.lambda)));
    }
    let game = load_game(&a.common.game)?;
    let config = optimizer_config(&a.common, OptimizerConfig::pgd_default(), seed)?;
    let result = br_optimize(&game, a.lambda, &config)?;
    finish_optimizer(&game, result.scheme, &result.history, config, "br", &a.common)
}

#[derive(Debug, Serialize)]
pub struct SimulateRow {
    pub k: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub n_replicates: u64,
    pub master_seed: u64,
    pub tool_version: &'static str,
}

fn check_k(ks: &[u64]) -> Result<()> {
    if ks.contains(&0) {
        return Err(Error::config("k", "rounds start at 1"));
    }
    Ok(())
}

fn simulate(a: &SimulateArgs, seed: u64) -> Result<()> {
    check_k(&a.k)?;
    let game = load_game(&a.game)?;
    let scheme = load_scheme(&a.scheme, &game)?;
    let rng = RngSpec::new(seed);
    let rows = a
        .k
        .iter()
        .map(|&k| {
            if a.exact {
                Ok(SimulateRow {
                    k,
                    estimate: ir_k_exact(&game, &scheme, k)?,
                    std_error: 0.0,
                    n_replicates: 0,
                    master_seed: seed,
                    tool_version: TOOL_VERSION,
                })
            } else {
                let e = ir_k_monte_carlo(&game, &scheme, k, a.replicates, &rng.child(k))?;
                Ok(SimulateRow {
                    k,
                    estimate: e.estimate,
                    std_error: e.std_error,
                    n_replicates: e.n_replicates,
                    master_seed: seed,
                    tool_version: TOOL_VERSION,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    emit_csv(&rows, a.out.as_deref())
}

#[derive(Debug, Serialize)]
pub struct BoundsRow {
    pub scheme: String,
    pub k: u64,
    pub bound: f64,
    pub bpr: f64,
    pub measured_irk: f64,
    pub std_error: f64,
    pub n_replicates: u64,
    pub master_seed: u64,
    pub tool_version: &'static str,
}

fn bounds(a: &BoundsArgs, seed: u64) -> Result<()> {
    check_k(&a.k)?;
    let game = load_game(&a.game)?;
    let scheme = load_scheme(&a.scheme, &game)?;
    let value = bpr(&game, &scheme);
    let name = a.scheme.display().to_string();
    let rng = RngSpec::new(seed);
    let rows = a
        .k
        .iter()
        .map(|&k| {
            let e = ir_k_monte_carlo(&game, &scheme, k, a.replicates, &rng.child(k))?;
            Ok(BoundsRow {
                scheme: name.clone(),
                k,
                bound: gap_upper_bound(&game, &scheme, k)?,
                bpr: value,
                measured_irk: e.estimate,
                std_error: e.std_error,
                n_replicates: e.n_replicates,
                master_seed: seed,
                tool_version: TOOL_VERSION,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit_csv(&rows, a.out.as_deref())
}

fn run(a: &RunArgs, seed: Option<u64>) -> Result<()> {
    let mut config = ExperimentConfig::load(&a.config)?;
    if let Some(seed) = seed {
        config.set_master_seed(seed);
    }
    let out = match &a.out {
        Some(path) => path.clone(),
        None => {
            let base = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from);
            base.join(format!("{}-seed{}", config.kind(), config.master_seed()))
        }
    };
    let done = run_experiment(&config, &out)?;
    eprintln!("wrote {}", done.display());
    Ok(())
}
