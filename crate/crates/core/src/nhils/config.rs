use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::moea::VariationConfig;
use crate::opera::StageSchedule;
use crate::sampling::SurrogateConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    Full,
    NoLocalSearch,
    NoHybridInit,
    PlainNsga2,
}

impl Ablation {
    pub const ALL: [Ablation; 4] = [Self::Full, Self::NoLocalSearch, Self::NoHybridInit, Self::PlainNsga2];

    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::NoLocalSearch => "no-local-search",
            Self::NoHybridInit => "no-hybrid-init",
            Self::PlainNsga2 => "plain-nsga2",
        }
    }

    pub fn hybrid_init(self) -> bool {
        matches!(self, Self::Full | Self::NoLocalSearch)
    }

    pub fn local_search(self) -> bool {
        matches!(self, Self::Full | Self::NoHybridInit)
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NhilsConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub local_search_prob: f64,
    pub surrogate: SurrogateConfig,
    pub variation: VariationConfig,
    pub schedule: StageSchedule,
    /// Defaults to `100 * population_size`.
    pub max_perturbation_attempts: Option<usize>,
    /// Class pairs tried per double-swap call; defaults to `m`.
    pub double_swap_budget: Option<usize>,
    pub ablation: Ablation,
    pub run_seed: u64,
}

impl Default for NhilsConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            max_generations: 100,
            local_search_prob: 0.1,
            surrogate: SurrogateConfig::default(),
            variation: VariationConfig::default(),
            schedule: StageSchedule::standard(),
            max_perturbation_attempts: None,
            double_swap_budget: None,
            ablation: Ablation::Full,
            run_seed: 0,
        }
    }
}

impl NhilsConfig {
    pub fn perturbation_attempts(&self) -> usize {
        self.max_perturbation_attempts.unwrap_or(100 * self.population_size)
    }

    pub fn double_swap_budget_for(&self, classes: usize) -> usize {
        self.double_swap_budget.unwrap_or(classes)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if self.population_size == 0 {
            return bad("population_size must be positive".into());
        }
        if !unit(self.local_search_prob) {
            return bad(format!("local_search_prob {} outside [0, 1]", self.local_search_prob));
        }
        let v = &self.variation;
        if !unit(v.crossover_prob) || !v.mutation_prob.is_none_or(unit) {
            return bad("variation probabilities must lie in [0, 1]".into());
        }
        if !(v.crossover_eta >= 0.0 && v.mutation_eta >= 0.0) {
            return bad("distribution indices must be >= 0".into());
        }
        if !(self.surrogate.lambda >= 0.0 && self.surrogate.lambda.is_finite()) {
            return bad(format!("surrogate lambda {} must be finite and >= 0", self.surrogate.lambda));
        }
        if self.max_perturbation_attempts == Some(0) {
            return bad("max_perturbation_attempts must be positive".into());
        }
        Ok(())
    }
}
