//! Encoding, constrained Pareto dominance, non-dominated sorting, crowding
//! distance, environmental selection and the integer SBX / polynomial
//! mutation operators.

mod selection;
mod solution;
mod sort;
mod variation;

pub use selection::{binary_tournament, environmental_selection, rank_and_crowding};
pub use solution::{
    constrained_dominates, evaluate, evaluate_cost, pareto_dominates, Evaluation, Individual, Solution,
};
pub use sort::{crowding_distance, nondominated_sort};
pub use variation::{crossover, mutate, VariationConfig};
