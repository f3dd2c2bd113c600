//! Game data model, posteriors, best responses and simplex geometry.

mod distribution;
mod game;
pub mod geometry;
mod scheme;
mod stackelberg;

pub use distribution::Distribution;
pub use game::{select_action, GameFile, PersuasionGame, TIE_TOLERANCE};
pub use geometry::{
    boundary_distance, conditional_entropy, entropy, kl_divergence, stochasticity,
};
pub use scheme::{bpr, signal_contributions, JointScheme, SchemeFile, MARGINAL_TOLERANCE, ZERO_MASS};
pub use stackelberg::StackelbergGame;
