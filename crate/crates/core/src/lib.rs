//! Fixed-budget best arm identification for stochastic rising rested bandits.
//!
//! - [`env`]: arm curves, rested pull dynamics and assumption checks.
//! - [`estimator`]: sliding-window pessimistic/optimistic estimators.
//! - [`policy`]: R-UCBE, R-SR and stationary baselines.
//! - [`theory`]: gaps, complexity indices, exploration thresholds and bounds.
//! - [`bench`]: seeded Monte Carlo runner, summaries and the CLI.

pub mod bench;
pub mod env;
pub mod error;
pub mod estimator;
pub mod policy;
pub mod theory;

pub use error::{Error, Result};
