//! Workbench for a one-street toy poker game: solve instances to approximate
//! equilibrium, extract (MDF, range advantage, optimal defense frequency)
//! datasets, fit regression models to them, and evaluate the 100-50-25 MIN
//! calling rule.

// Input checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod datagen;
pub mod error;
pub mod game;
pub mod metrics;
pub mod plot;
pub mod regress;
pub mod solver;

pub use error::{Error, Result};
pub use game::{build_game, payoff, pot_odds_threshold, CardDistribution, GameSpec, GameTree};
pub use metrics::{mdf, odf, range_advantage};
pub use solver::{best_response_value, exploitability, solve, SolveReport, SolverConfig};
