//! Capacity of discrete memoryless channels by Arimoto iteration, and an
//! analysis of how fast that iteration converges.
//!
//! The pipeline: [`solver::solve_capacity`] finds the optimum and classifies
//! inputs, [`local`] differentiates the update map there and predicts the
//! rate, [`slow_rate`] gives the limits of `N·μᴺ` in the sublinear case, and
//! [`empirics`] measures the same quantities on recorded iterations.
//! [`oracles`] holds independent checks (finite differences, grid search,
//! closed-form eigenvalues).

#![allow(clippy::needless_range_loop)]

pub mod arimoto;
pub mod channel;
pub mod empirics;
pub mod error;
pub mod fixtures;
pub mod local;
pub mod numeric;
pub mod oracles;
#[cfg(test)]
mod properties;
pub mod slow_rate;
pub mod solver;

pub use channel::{Channel, Distribution};
pub use error::{Error, Result};
