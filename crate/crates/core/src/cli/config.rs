//! Experiment configuration files: TOML documents tagged by `kind`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::CityParams;
use crate::solvers::OptimizerConfig;

/// Log-spaced integer grid from `lo` to `hi` with `per_decade` points per factor of ten.
pub fn log_spaced(lo: u64, hi: u64, per_decade: usize) -> Vec<u64> {
    let (a, b) = ((lo.max(1) as f64).log10(), (hi.max(1) as f64).log10());
    let steps = ((b - a) * per_decade as f64).round() as usize;
    let mut grid: Vec<u64> = (0..=steps)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / steps.max(1) as f64).round() as u64)
        .collect();
    grid.dedup();
    grid
}

fn default_replicates() -> u64 {
    10_000
}

fn default_k_grid() -> Vec<u64> {
    log_spaced(1, 10_000, 4)
}

fn default_sgd() -> OptimizerConfig {
    OptimizerConfig::sgd_default()
}

fn default_pgd() -> OptimizerConfig {
    OptimizerConfig::pgd_default()
}

fn merge(base: &mut toml::Table, patch: toml::Table) {
    for (key, value) in patch {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(inner)), toml::Value::Table(patch)) => merge(inner, patch),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Fields missing from an optimizer table fall back to `base`, not to the
/// type-wide default.
fn overlay<'de, D: serde::Deserializer<'de>>(d: D, base: OptimizerConfig) -> std::result::Result<OptimizerConfig, D::Error> {
    use serde::de::Error as _;
    let patch = toml::Table::deserialize(d)?;
    let mut merged = toml::Table::try_from(&base).map_err(D::Error::custom)?;
    merge(&mut merged, patch);
    serde_path_to_error::deserialize(toml::Value::Table(merged))
        .map_err(|e| D::Error::custom(format!("at `{}`: {}", e.path(), e.inner())))
}

fn pgd_section<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<OptimizerConfig, D::Error> {
    overlay(d, OptimizerConfig::pgd_default())
}

fn safety_sgd_section<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<OptimizerConfig, D::Error> {
    overlay(d, default_safety_sgd())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowerCompare {
    pub master_seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    pub n: usize,
    pub tau: f64,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<u64>,
    #[serde(default = "default_k_opts")]
    pub sgd_k_opt: Vec<u64>,
    #[serde(default = "default_lambdas")]
    pub br_lambda: Vec<f64>,
    #[serde(default = "default_sgd")]
    pub sgd: OptimizerConfig,
    #[serde(default = "default_pgd", deserialize_with = "pgd_section")]
    pub br: OptimizerConfig,
}

fn default_k_opts() -> Vec<u64> {
    vec![300]
}

fn default_lambdas() -> Vec<f64> {
    vec![30.0, 60.0, 90.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGames {
    pub master_seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    pub n_games: usize,
    pub n_states: usize,
    pub n_actions: usize,
    pub lambdas: Vec<f64>,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<u64>,
    #[serde(default = "default_pgd", deserialize_with = "pgd_section")]
    pub br: OptimizerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Safety {
    pub master_seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default = "default_safety_k")]
    pub k: u64,
    #[serde(default)]
    pub city: CityParams,
    #[serde(default = "default_safety_sgd", deserialize_with = "safety_sgd_section")]
    pub sgd: OptimizerConfig,
}

fn default_safety_k() -> u64 {
    100
}

fn default_safety_sgd() -> OptimizerConfig {
    OptimizerConfig {
        max_iters: 50,
        batch_size: 200,
        k_opt: 100,
        ..OptimizerConfig::sgd_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsTable {
    pub master_seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    pub n_games: usize,
    #[serde(default = "default_three")]
    pub n_states: usize,
    #[serde(default = "default_three")]
    pub n_actions: usize,
    #[serde(default = "default_two")]
    pub n_signals: usize,
    #[serde(default = "default_bounds_k")]
    pub k_grid: Vec<u64>,
    /// Interior schemes keep every posterior at least this far from a boundary.
    #[serde(default = "default_min_distance")]
    pub min_boundary_distance: f64,
}

fn default_three() -> usize {
    3
}

fn default_two() -> usize {
    2
}

fn default_bounds_k() -> Vec<u64> {
    vec![1, 10, 100]
}

fn default_min_distance() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackelbergGap {
    pub master_seed: u64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    pub n_values: Vec<usize>,
    pub eps_values: Vec<f64>,
    /// Followers' sample sizes tried when measuring how many samples suffice.
    #[serde(default = "default_stackelberg_grid")]
    pub k_grid: Vec<u64>,
}

fn default_stackelberg_grid() -> Vec<u64> {
    log_spaced(1, 100_000, 4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    FlowerCompare(FlowerCompare),
    RandomGames(RandomGames),
    Safety(Safety),
    BoundsTable(BoundsTable),
    StackelbergGap(StackelbergGap),
}

// Tagged enums buffer their content and lose the field path, so each body is
// deserialized on its own.
fn body_of<T: serde::de::DeserializeOwned>(body: toml::Value) -> Result<T> {
    serde_path_to_error::deserialize(body).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "<document>".to_string() } else { path }, e.into_inner().to_string())
    })
}

fn check(ok: bool, path: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

fn check_grid(grid: &[u64], path: &str) -> Result<()> {
    check(!grid.is_empty() && grid.iter().all(|&k| k >= 1), path, "needs at least one entry, all >= 1")
}

fn check_optimizer(config: &OptimizerConfig, prefix: &str) -> Result<()> {
    config.validate().map_err(|e| match e {
        Error::Config { path, message } => Error::config(format!("{prefix}.{path}"), message),
        other => other,
    })
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::FlowerCompare(_) => "flower-compare",
            ExperimentConfig::RandomGames(_) => "random-games",
            ExperimentConfig::Safety(_) => "safety",
            ExperimentConfig::BoundsTable(_) => "bounds-table",
            ExperimentConfig::StackelbergGap(_) => "stackelberg-gap",
        }
    }

    pub fn master_seed(&self) -> u64 {
        match self {
            ExperimentConfig::FlowerCompare(c) => c.master_seed,
            ExperimentConfig::RandomGames(c) => c.master_seed,
            ExperimentConfig::Safety(c) => c.master_seed,
            ExperimentConfig::BoundsTable(c) => c.master_seed,
            ExperimentConfig::StackelbergGap(c) => c.master_seed,
        }
    }

    pub fn set_master_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::FlowerCompare(c) => c.master_seed = seed,
            ExperimentConfig::RandomGames(c) => c.master_seed = seed,
            ExperimentConfig::Safety(c) => c.master_seed = seed,
            ExperimentConfig::BoundsTable(c) => c.master_seed = seed,
            ExperimentConfig::StackelbergGap(c) => c.master_seed = seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::FlowerCompare(c) => {
                check(c.replicates >= 1, "replicates", "must be positive")?;
                check(c.n >= 2, "n", "flower games need n >= 2")?;
                check(
                    c.tau > 0.0 && c.tau <= 1.0 / (c.n as f64 - 1.0),
                    "tau",
                    "must lie in (0, 1/(n-1)]",
                )?;
                check_grid(&c.k_grid, "k_grid")?;
                check(c.sgd_k_opt.iter().all(|&k| k >= 1), "sgd_k_opt", "entries must be >= 1")?;
                check(c.br_lambda.iter().all(|&l| l >= 0.0 && l.is_finite()), "br_lambda", "entries must be finite and >= 0")?;
                check_optimizer(&c.sgd, "sgd")?;
                check_optimizer(&c.br, "br")
            }
            ExperimentConfig::RandomGames(c) => {
                check(c.replicates >= 1, "replicates", "must be positive")?;
                check(c.n_games >= 1, "n_games", "must be positive")?;
                check(c.n_states >= 1, "n_states", "must be positive")?;
                check(c.n_actions >= 1, "n_actions", "must be positive")?;
                check(!c.lambdas.is_empty(), "lambdas", "needs at least one entry")?;
                check(c.lambdas.iter().all(|&l| l >= 0.0 && l.is_finite()), "lambdas", "entries must be finite and >= 0")?;
                check_grid(&c.k_grid, "k_grid")?;
                check_optimizer(&c.br, "br")
            }
            ExperimentConfig::Safety(c) => {
                check(c.replicates >= 1, "replicates", "must be positive")?;
                check(c.k >= 1, "k", "must be positive")?;
                check(c.city.n_nodes >= 2, "city.n_nodes", "needs at least two nodes")?;
                check(
                    c.city.incident_size >= 1 && c.city.incident_size <= c.city.n_nodes,
                    "city.incident_size",
                    "must lie in 1..=n_nodes",
                )?;
                check(c.city.n_incidents >= 1, "city.n_incidents", "must be positive")?;
                check(c.city.penalty > 0.0, "city.penalty", "must be positive")?;
                check_optimizer(&c.sgd, "sgd")
            }
            ExperimentConfig::BoundsTable(c) => {
                check(c.replicates >= 1, "replicates", "must be positive")?;
                check(c.n_games >= 1, "n_games", "must be positive")?;
                check(c.n_states >= 1 && c.n_actions >= 1, "n_states", "game dimensions must be positive")?;
                check(c.n_signals >= 1, "n_signals", "must be positive")?;
                check_grid(&c.k_grid, "k_grid")?;
                check(c.min_boundary_distance >= 0.0, "min_boundary_distance", "must be nonnegative")
            }
            ExperimentConfig::StackelbergGap(c) => {
                check(c.replicates >= 1, "replicates", "must be positive")?;
                check(!c.n_values.is_empty() && c.n_values.iter().all(|&n| n >= 4), "n_values", "entries must be >= 4")?;
                check(
                    !c.eps_values.is_empty() && c.eps_values.iter().all(|&e| e > 0.0 && e <= 0.125),
                    "eps_values",
                    "entries must lie in (0, 1/8]",
                )?;
                check_grid(&c.k_grid, "k_grid")
            }
        }
    }

    /// Parses and validates; errors carry the offending field path.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config("<document>", e.to_string()))?;
        let kind = match table.remove("kind") {
            Some(toml::Value::String(kind)) => kind,
            Some(_) => return Err(Error::config("kind", "must be a string")),
            None => return Err(Error::config("kind", "missing experiment kind")),
        };
        let body = toml::Value::Table(table);
        let config = match kind.as_str() {
            "flower-compare" => ExperimentConfig::FlowerCompare(body_of(body)?),
            "random-games" => ExperimentConfig::RandomGames(body_of(body)?),
            "safety" => ExperimentConfig::Safety(body_of(body)?),
            "bounds-table" => ExperimentConfig::BoundsTable(body_of(body)?),
            "stackelberg-gap" => ExperimentConfig::StackelbergGap(body_of(body)?),
            other => {
                return Err(Error::config(
                    "kind",
                    format!("unknown kind `{other}`; expected flower-compare, random-games, safety, bounds-table or stackelberg-gap"),
                ))
            }
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        ExperimentConfig::from_toml(&text)
    }

    /// The fully resolved configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }
}
