//! Bayesian persuasion when the receiver learns the signaling scheme from
//! repeated interaction.
//!
//! The receiver keeps counts of observed `(state, signal)` pairs and
//! best-responds to the resulting empirical posteriors. This crate evaluates
//! schemes under that receiver ([`inference`]), bounds the loss against a
//! receiver who knows the scheme ([`bounds`]), generates the standard game
//! families ([`games`]) and designs schemes that are easier to infer
//! ([`solvers`]). The [`cli`] module drives reproducible experiments.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod games;
pub mod inference;
pub mod model;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use model::{bpr, Distribution, JointScheme, PersuasionGame, StackelbergGame};
pub use rng::RngSpec;

/// Version string stamped into every emitted CSV.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
