//! NSGA-II with hybrid initialization and local search.
//!
//! The ablation switch also exposes the plain NSGA-II baseline and the two
//! single-component variants.

mod config;
mod init;
mod local_search;
mod run;

pub use config::{Ablation, NhilsConfig};
pub use init::{greedy_seed, hybrid_initialization, random_initialization, repair_to_surrogate_feasible};
pub use local_search::{LocalSearch, LsOutcome};
pub use run::{run, run_with_stop, FrontPoint, GenerationStats, RunResult};
