use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::opera::{estimate_cl_opera, ClEstimate, StageSchedule};

/// One selected item index per class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Solution {
    genes: Vec<usize>,
}

impl Solution {
    pub fn new(genes: Vec<usize>) -> Self {
        Self { genes }
    }

    /// Builds a solution and checks it against `instance`.
    pub fn for_instance(instance: &Instance, genes: Vec<usize>) -> Result<Self> {
        let s = Self::new(genes);
        s.check(instance)?;
        Ok(s)
    }

    pub fn genes(&self) -> &[usize] {
        &self.genes
    }

    pub fn is_valid_for(&self, instance: &Instance) -> bool {
        self.check(instance).is_ok()
    }

    fn check(&self, instance: &Instance) -> Result<()> {
        if self.genes.len() != instance.class_count() {
            return Err(Error::InvalidArgument(format!(
                "solution has {} genes, instance has {} classes",
                self.genes.len(),
                instance.class_count()
            )));
        }
        for (i, &j) in self.genes.iter().enumerate() {
            if j >= instance.class(i).len() {
                return Err(Error::InvalidArgument(format!(
                    "gene {i} selects item {j} but class {i} has {} items",
                    instance.class(i).len()
                )));
            }
        }
        Ok(())
    }
}

/// Objective values and constraint status of an evaluated solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cost: f64,
    /// `-p_hat`, so both objectives are minimized.
    pub neg_cl: f64,
    pub cl: ClEstimate,
    pub feasible: bool,
    /// `max(0, P_0 - p_hat)`
    pub violation: f64,
}

impl Evaluation {
    pub fn new(cost: f64, cl: ClEstimate, required_confidence: f64) -> Self {
        let violation = (required_confidence - cl.p_hat).max(0.0);
        Self { cost, neg_cl: -cl.p_hat, cl, feasible: violation == 0.0, violation }
    }

    pub fn p_hat(&self) -> f64 {
        self.cl.p_hat
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub solution: Solution,
    pub evaluation: Evaluation,
}

/// Total cost of the selected items.
pub fn evaluate_cost(instance: &Instance, solution: &Solution) -> f64 {
    solution.genes().iter().enumerate().map(|(i, &j)| instance.item(i, j).cost).sum()
}

/// Cost plus a staged confidence-level estimate.
pub fn evaluate<R: Rng + ?Sized>(
    instance: &Instance,
    solution: &Solution,
    schedule: &StageSchedule,
    rng: &mut R,
) -> Evaluation {
    let cl = estimate_cl_opera(instance, solution, schedule, rng);
    Evaluation::new(evaluate_cost(instance, solution), cl, instance.required_confidence())
}

/// Pareto dominance on (cost, -p_hat), ignoring the chance constraint.
pub fn pareto_dominates(a: &Evaluation, b: &Evaluation) -> bool {
    a.cost <= b.cost && a.neg_cl <= b.neg_cl && (a.cost < b.cost || a.neg_cl < b.neg_cl)
}

/// Feasible beats infeasible; infeasible pairs compare by violation; feasible
/// pairs by Pareto dominance.
pub fn constrained_dominates(a: &Evaluation, b: &Evaluation) -> bool {
    match (a.feasible, b.feasible) {
        (true, true) => pareto_dominates(a, b),
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
    }
}
