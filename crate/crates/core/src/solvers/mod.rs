//! Scheme design: the known-commitment linear program, projection onto persuasive
//! schemes, stochastic gradient ascent on the round-`k` value and gradient ascent for
//! boundedly rational receivers.

mod config;
mod feasible;
mod lp;
mod mvg;
mod regularized;
mod sgd;

pub use config::{OptimizerConfig, StepSchedule};
pub use feasible::{constraint_residual, project_feasible, FeasibleSet, FEASIBLE_TOLERANCE};
pub use lp::{
    certify, solve_known_commitment_lp, solve_lp, DesignSolution, KktCertificate, LinearProgram, LpSolution,
    KKT_TOLERANCE,
};
pub use mvg::{mvg_gradient, mvg_gradient_with, MvgEstimate, MvgOptions, ZeroColumnPolicy};
pub use regularized::{br_gradient, br_objective, br_optimize, quantal_response};
pub use sgd::{initial_scheme, sgd_from, sgd_optimize, IterateRecord, OptimizerResult};
