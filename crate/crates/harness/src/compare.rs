use serde::{Deserialize, Serialize};
use std::time::Instant;

use ccmckp::instance::Instance;
use ccmckp::moea::{constrained_dominates, evaluate_cost, pareto_dominates, Evaluation, Solution};
use ccmckp::opera::{estimate_cl_fixed, estimate_cl_opera, ClEstimate, StageSchedule};
use ccmckp::rng::{stream, tag};

/// Staged versus fixed-sample evaluation of the same solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatorComparison {
    pub solutions: usize,
    pub fixed_samples_per_solution: u64,
    pub opera_samples: u64,
    pub fixed_samples: u64,
    /// `1 - opera_samples / fixed_samples`
    pub sample_reduction: f64,
    pub early_stopped: usize,
    pub opera_wall_s: f64,
    pub fixed_wall_s: f64,
    /// Staged minus fixed estimate, per solution.
    pub deltas: Vec<f64>,
    pub max_abs_delta: f64,
    /// Fraction of solution pairs on which both evaluators induce the same
    /// Pareto-dominance relation over (cost, confidence level).
    pub dominance_agreement: f64,
    /// The same rate under constrained dominance, which also orders
    /// infeasible pairs by their estimated violation.
    pub constrained_agreement: f64,
}

fn relation(dominates: fn(&Evaluation, &Evaluation) -> bool, a: &Evaluation, b: &Evaluation) -> i8 {
    if dominates(a, b) {
        1
    } else if dominates(b, a) {
        -1
    } else {
        0
    }
}

/// Fraction of unordered pairs with the same Pareto-dominance relation under
/// both evaluation lists; 1 when there are fewer than two solutions.
pub fn dominance_agreement(a: &[Evaluation], b: &[Evaluation]) -> f64 {
    agreement(pareto_dominates, a, b)
}

/// As [`dominance_agreement`] under constrained dominance.
pub fn constrained_agreement(a: &[Evaluation], b: &[Evaluation]) -> f64 {
    agreement(constrained_dominates, a, b)
}

fn agreement(dominates: fn(&Evaluation, &Evaluation) -> bool, a: &[Evaluation], b: &[Evaluation]) -> f64 {
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut same = 0u64;
    let mut total = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            total += 1;
            same += u64::from(relation(dominates, &a[i], &a[j]) == relation(dominates, &b[i], &b[j]));
        }
    }
    same as f64 / total as f64
}

/// Evaluates every solution with the staged estimator and with `fixed_n`
/// plain draws. Solution `k` uses streams `(seed, EVALUATION, 1, k)` and
/// `(seed, EVALUATION, 2, k)` respectively.
pub fn compare_evaluators(
    instance: &Instance,
    solutions: &[Solution],
    schedule: &StageSchedule,
    fixed_n: u64,
    seed: u64,
) -> EvaluatorComparison {
    let p0 = instance.required_confidence();
    let to_eval = |s: &Solution, cl: ClEstimate| Evaluation::new(evaluate_cost(instance, s), cl, p0);

    let t = Instant::now();
    let staged: Vec<Evaluation> = solutions
        .iter()
        .enumerate()
        .map(|(k, s)| {
            to_eval(s, estimate_cl_opera(instance, s, schedule, &mut stream(seed, &[tag::EVALUATION, 1, k as u64])))
        })
        .collect();
    let opera_wall_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let fixed: Vec<Evaluation> = solutions
        .iter()
        .enumerate()
        .map(|(k, s)| {
            to_eval(s, estimate_cl_fixed(instance, s, fixed_n, &mut stream(seed, &[tag::EVALUATION, 2, k as u64])))
        })
        .collect();
    let fixed_wall_s = t.elapsed().as_secs_f64();

    let opera_samples: u64 = staged.iter().map(|e| e.cl.samples_used).sum();
    let fixed_samples: u64 = fixed.iter().map(|e| e.cl.samples_used).sum();
    let deltas: Vec<f64> = staged.iter().zip(&fixed).map(|(a, b)| a.p_hat() - b.p_hat()).collect();
    EvaluatorComparison {
        solutions: solutions.len(),
        fixed_samples_per_solution: fixed_n,
        opera_samples,
        fixed_samples,
        sample_reduction: if fixed_samples == 0 { 0.0 } else { 1.0 - opera_samples as f64 / fixed_samples as f64 },
        early_stopped: staged.iter().filter(|e| e.cl.early_stopped).count(),
        opera_wall_s,
        fixed_wall_s,
        max_abs_delta: deltas.iter().fold(0.0, |m, d| m.max(d.abs())),
        deltas,
        dominance_agreement: dominance_agreement(&staged, &fixed),
        constrained_agreement: constrained_agreement(&staged, &fixed),
    }
}
