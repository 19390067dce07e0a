//! Experiment plans, the cell runner, evaluator comparison and result
//! emission for the `ccmckp` command-line tool.

pub mod compare;
pub mod output;
pub mod plan;
pub mod runner;

pub use compare::{compare_evaluators, constrained_agreement, dominance_agreement, EvaluatorComparison};
pub use output::{emit_front_plots_data, load_fronts, read_front, read_plot_data, recompute_metrics, write_bundle};
pub use plan::{AlgorithmSpec, Budget, ExperimentPlan, InstanceRef, Outputs};
pub use runner::{run_plan, ResultRow, ResultsBundle, RunFront, SummaryRow};
