use serde::{Deserialize, Serialize};

use super::mvg::ZeroColumnPolicy;
use crate::error::{Error, Result};

/// `eta_t = initial / t^decay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSchedule {
    pub initial: f64,
    pub decay: f64,
}

impl StepSchedule {
    pub fn at(&self, t: u64) -> f64 {
        self.initial / (t.max(1) as f64).powf(self.decay)
    }
}

/// Settings shared by the stochastic and deterministic scheme optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub max_iters: u64,
    pub step: StepSchedule,
    /// Replicates per gradient estimate.
    pub batch_size: u64,
    /// Round whose value is optimized.
    pub k_opt: u64,
    /// Iterates averaged into the returned scheme.
    pub tail_average_window: usize,
    /// Deterministic ascent stops once no entry moves by more than this.
    pub tolerance: f64,
    pub master_seed: u64,
    /// See [`super::MvgOptions::enumeration_cap`].
    pub enumeration_cap: usize,
    pub zero_columns: ZeroColumnPolicy,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig::sgd_default()
    }
}

impl OptimizerConfig {
    pub fn sgd_default() -> Self {
        OptimizerConfig {
            max_iters: 200,
            step: StepSchedule { initial: 0.5, decay: 0.5 },
            batch_size: 1000,
            k_opt: 100,
            tail_average_window: 10,
            tolerance: 1e-9,
            master_seed: 0,
            enumeration_cap: 1,
            zero_columns: ZeroColumnPolicy::OneSided,
        }
    }

    pub fn pgd_default() -> Self {
        OptimizerConfig {
            max_iters: 500,
            step: StepSchedule { initial: 0.1, decay: 0.5 },
            ..OptimizerConfig::sgd_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| Err(Error::config(path, message));
        if !(self.step.initial > 0.0 && self.step.initial.is_finite()) {
            return bad("step.initial", format!("must be positive, got {}", self.step.initial));
        }
        if !(self.step.decay > 0.0 && self.step.decay <= 1.0) {
            return bad("step.decay", format!("must lie in (0, 1], got {}", self.step.decay));
        }
        if self.batch_size == 0 {
            return bad("batch_size", "must be positive".into());
        }
        if self.k_opt == 0 {
            return bad("k_opt", "must be positive".into());
        }
        if self.tail_average_window == 0 {
            return bad("tail_average_window", "must be positive".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance", format!("must be positive, got {}", self.tolerance));
        }
        if self.enumeration_cap == 0 {
            return bad("enumeration_cap", "must be at least 1".into());
        }
        Ok(())
    }
}
