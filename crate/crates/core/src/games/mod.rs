//! Game families and experiment metrics.

mod flower;
mod metrics;
mod random;
mod safety;

pub use flower::{
    flower_action_count, flower_game, flower_optimal_scheme, flower_stackelberg, half_value_tau,
    stackelberg_eps_strategy, FlowerAction,
};
pub use metrics::{signal_reward_decomposition, signal_support_metric, SUPPORT_COVERAGE};
pub use random::{random_game, random_interior_scheme};
pub use safety::{safety_alert_game, CityParams, SafetyCity};
