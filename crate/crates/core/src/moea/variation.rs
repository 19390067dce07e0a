use rand::Rng;
use serde::{Deserialize, Serialize};

use super::solution::Solution;

/// Simulated binary crossover and polynomial mutation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationConfig {
    pub crossover_prob: f64,
    pub crossover_eta: f64,
    /// Per-gene mutation probability; `None` means `1/m`.
    pub mutation_prob: Option<f64>,
    pub mutation_eta: f64,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self { crossover_prob: 0.9, crossover_eta: 15.0, mutation_prob: None, mutation_eta: 20.0 }
    }
}

impl VariationConfig {
    pub fn mutation_prob_for(&self, genes: usize) -> f64 {
        self.mutation_prob.unwrap_or(1.0 / genes.max(1) as f64)
    }
}

fn to_gene(x: f64, upper: usize) -> usize {
    x.round().clamp(0.0, upper as f64) as usize
}

fn sbx_beta_q(u: f64, beta: f64, eta: f64) -> f64 {
    let alpha = 2.0 - beta.powf(-(eta + 1.0));
    if u <= 1.0 / alpha {
        (u * alpha).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
    }
}

/// Bounded integer SBX. `class_sizes[i]` gives the number of items in class i.
///
/// With probability `crossover_prob` each gene pair is recombined with
/// probability 1/2; children are rounded and clamped to the class bounds.
pub fn crossover<R: Rng + ?Sized>(
    p1: &Solution,
    p2: &Solution,
    class_sizes: &[usize],
    cfg: &VariationConfig,
    rng: &mut R,
) -> (Solution, Solution) {
    let mut c1 = p1.genes().to_vec();
    let mut c2 = p2.genes().to_vec();
    if rng.random::<f64>() >= cfg.crossover_prob {
        return (Solution::new(c1), Solution::new(c2));
    }
    let eta = cfg.crossover_eta;
    for i in 0..c1.len() {
        let upper = class_sizes[i] - 1;
        if rng.random::<f64>() >= 0.5 || upper == 0 || c1[i] == c2[i] {
            continue;
        }
        let (lo, hi) = (0.0, upper as f64);
        let y1 = c1[i].min(c2[i]) as f64;
        let y2 = c1[i].max(c2[i]) as f64;
        let gap = y2 - y1;
        let u = rng.random::<f64>();
        let bq1 = sbx_beta_q(u, 1.0 + 2.0 * (y1 - lo) / gap, eta);
        let bq2 = sbx_beta_q(u, 1.0 + 2.0 * (hi - y2) / gap, eta);
        let a = (0.5 * ((y1 + y2) - bq1 * gap)).clamp(lo, hi);
        let b = (0.5 * ((y1 + y2) + bq2 * gap)).clamp(lo, hi);
        let (a, b) = if rng.random::<f64>() < 0.5 { (b, a) } else { (a, b) };
        c1[i] = to_gene(a, upper);
        c2[i] = to_gene(b, upper);
    }
    (Solution::new(c1), Solution::new(c2))
}

/// Bounded polynomial mutation on each gene with the configured probability.
/// Singleton classes are left alone.
pub fn mutate<R: Rng + ?Sized>(
    solution: &Solution,
    class_sizes: &[usize],
    cfg: &VariationConfig,
    rng: &mut R,
) -> Solution {
    let mut genes = solution.genes().to_vec();
    let p = cfg.mutation_prob_for(genes.len());
    let power = 1.0 / (cfg.mutation_eta + 1.0);
    for (i, g) in genes.iter_mut().enumerate() {
        let upper = class_sizes[i] - 1;
        if rng.random::<f64>() >= p || upper == 0 {
            continue;
        }
        let range = upper as f64;
        let y = *g as f64;
        let d1 = y / range;
        let d2 = (range - y) / range;
        let r = rng.random::<f64>();
        let dq = if r < 0.5 {
            let v = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(cfg.mutation_eta + 1.0);
            v.powf(power) - 1.0
        } else {
            let v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(cfg.mutation_eta + 1.0);
            1.0 - v.powf(power)
        };
        *g = to_gene(y + dq * range, upper);
    }
    Solution::new(genes)
}
