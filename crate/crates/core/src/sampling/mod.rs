//! Per-item weight oracles, total-weight sampling and the surrogate weight
//! `mu + lambda * sigma` used for cheap feasibility screening.

pub mod dist;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, WeightSpec};
use crate::moea::Solution;
use dist::Sampler;

/// Sampling access to one item's weight plus a fixed bank of draws taken at
/// construction. `mean` and `stddev` are always recomputed from the bank.
#[derive(Debug, Clone)]
pub struct WeightOracle {
    spec: WeightSpec,
    bank: Vec<f64>,
    mean: f64,
    stddev: f64,
    sampler: Sampler,
}

impl PartialEq for WeightOracle {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.bank == other.bank
    }
}

impl WeightOracle {
    /// Wraps an existing bank (e.g. one read back from a document).
    pub fn from_bank(spec: WeightSpec, bank: Vec<f64>) -> Result<Self> {
        spec.validate("weight")?;
        if bank.is_empty() {
            return Err(Error::invariant("bank", "bank must hold at least one sample"));
        }
        if let Some(k) = bank.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invariant(format!("bank[{k}]"), "bank values must be finite and >= 0"));
        }
        let (mean, stddev) = bank_stats(&bank);
        let sampler = Sampler::new(&spec);
        Ok(Self { spec, bank, mean, stddev, sampler })
    }

    /// Draws a fresh bank of `bank_size` samples from `spec`.
    pub fn sample_bank<R: Rng + ?Sized>(spec: WeightSpec, bank_size: usize, rng: &mut R) -> Result<Self> {
        spec.validate("weight")?;
        let sampler = Sampler::new(&spec);
        let bank = (0..bank_size).map(|_| sampler.sample(rng)).collect();
        Self::from_bank(spec, bank)
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn bank(&self) -> &[f64] {
        &self.bank
    }

    /// Sample mean of the bank.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample standard deviation of the bank (0 for a single sample).
    pub fn stddev(&self) -> f64 {
        self.stddev
    }

    /// One fresh draw.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler.sample(rng)
    }

    /// True when `w` is this oracle's failed-transmission sentinel.
    pub fn is_failure(&self, w: f64) -> bool {
        self.spec.failure_weight() == Some(w)
    }

    pub(crate) fn constant(&self) -> Option<f64> {
        self.sampler.constant()
    }
}

fn bank_stats(bank: &[f64]) -> (f64, f64) {
    let n = bank.len() as f64;
    let mean = bank.iter().sum::<f64>() / n;
    if bank.len() < 2 {
        return (mean, 0.0);
    }
    let ss = bank.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Risk-aversion weight of the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    pub lambda: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self { lambda: 3.0 }
    }
}

/// One fresh draw of an item's weight.
pub fn draw_weight<R: Rng + ?Sized>(oracle: &WeightOracle, rng: &mut R) -> f64 {
    oracle.draw(rng)
}

/// One sample of the solution's total weight. A failed transmission in any
/// term makes the whole sample `+inf`, which violates every capacity.
pub fn draw_total_weight<R: Rng + ?Sized>(instance: &Instance, solution: &Solution, rng: &mut R) -> f64 {
    let mut total = 0.0;
    for (i, &j) in solution.genes().iter().enumerate() {
        let oracle = &instance.item(i, j).oracle;
        let w = oracle.draw(rng);
        if oracle.is_failure(w) {
            return f64::INFINITY;
        }
        total += w;
    }
    total
}

/// `mu + lambda * sigma` from the oracle's bank.
pub fn surrogate_weight(oracle: &WeightOracle, cfg: &SurrogateConfig) -> f64 {
    oracle.mean() + cfg.lambda * oracle.stddev()
}

/// Sum of the selected items' surrogate weights.
pub fn surrogate_total(instance: &Instance, solution: &Solution, cfg: &SurrogateConfig) -> f64 {
    solution.genes().iter().enumerate().map(|(i, &j)| surrogate_weight(&instance.item(i, j).oracle, cfg)).sum()
}

/// Surrogate weights of every item, precomputed for the search operators.
#[derive(Debug, Clone)]
pub struct SurrogateTable {
    weights: Vec<Vec<f64>>,
    capacity: f64,
}

impl SurrogateTable {
    pub fn new(instance: &Instance, cfg: &SurrogateConfig) -> Self {
        let weights = instance
            .classes()
            .iter()
            .map(|c| c.items.iter().map(|it| surrogate_weight(&it.oracle, cfg)).collect())
            .collect();
        Self { weights, capacity: instance.capacity() }
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn get(&self, class: usize, item: usize) -> f64 {
        self.weights[class][item]
    }

    pub fn class(&self, class: usize) -> &[f64] {
        &self.weights[class]
    }

    /// Summed in class order, so it equals [`surrogate_total`] exactly.
    pub fn total(&self, genes: &[usize]) -> f64 {
        genes.iter().enumerate().map(|(i, &j)| self.weights[i][j]).sum()
    }

    pub fn is_feasible(&self, genes: &[usize]) -> bool {
        self.total(genes) <= self.capacity
    }

    /// Total of the per-class minimum surrogate weights.
    pub fn min_total(&self) -> f64 {
        self.weights.iter().map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)).sum()
    }
}

/// Counts capacity-respecting total-weight samples for one solution.
///
/// Constant-weight items are folded into an offset; a solution made only of
/// constant items has a deterministic indicator and consumes no randomness.
/// A sample stops drawing once its partial sum exceeds capacity since weights
/// are nonnegative.
pub(crate) struct CapacityCounter<'a> {
    offset: f64,
    stochastic: Vec<&'a WeightOracle>,
    capacity: f64,
}

impl<'a> CapacityCounter<'a> {
    pub(crate) fn new(instance: &'a Instance, solution: &Solution) -> Self {
        let mut offset = 0.0;
        let mut stochastic = Vec::new();
        for (i, &j) in solution.genes().iter().enumerate() {
            let oracle = &instance.item(i, j).oracle;
            match oracle.constant() {
                Some(c) => offset += c,
                None => stochastic.push(oracle),
            }
        }
        Self { offset, stochastic, capacity: instance.capacity() }
    }

    pub(crate) fn count<R: Rng + ?Sized>(&self, samples: u64, rng: &mut R) -> u64 {
        if self.stochastic.is_empty() {
            return if self.offset <= self.capacity { samples } else { 0 };
        }
        let mut hits = 0;
        for _ in 0..samples {
            let mut total = self.offset;
            let mut within = true;
            for oracle in &self.stochastic {
                total += oracle.draw(rng);
                if total > self.capacity {
                    within = false;
                    break;
                }
            }
            hits += u64::from(within);
        }
        hits
    }
}
