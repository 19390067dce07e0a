//! Multi-objective chance-constrained multiple-choice knapsack.
//!
//! Instances with sampled item weights, a staged Monte-Carlo confidence
//! estimator, a hybrid NSGA-II solver with local search, and the quality
//! indicators used to compare solvers.

pub mod error;
pub mod instance;
pub mod metrics;
pub mod moea;
pub mod nhils;
pub mod opera;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
