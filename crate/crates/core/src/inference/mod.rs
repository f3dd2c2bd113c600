//! Receivers who learn the scheme from samples: count draws, round-`k` value estimators
//! and a sequential simulator.

mod counts;
mod estimate;
pub(crate) mod sampling;
mod simulate;
mod stackelberg;

pub use counts::{sample_counts, ReceiverCounts};
pub use estimate::{
    exact_term_count, ir_k_exact, ir_k_exact_with_cap, ir_k_monte_carlo, signal_action_values, IrEstimate,
    DEFAULT_EXACT_CAP,
};
pub use simulate::{cumulative_means, simulate_round_means, simulate_rounds, RoundRecord};
pub use stackelberg::stackelberg_ir_k;
