use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use ccmckp::instance::{read_instance, Benchmark, Instance, Scale};
use ccmckp::metrics::DEFAULT_MARGIN;
use ccmckp::nhils::{Ablation, NhilsConfig};
use ccmckp::rng::derive_seed;

/// A generated benchmark instance or an instance document on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum InstanceRef {
    Generated { benchmark: Benchmark, scale: Scale, seed: u64 },
    File { path: PathBuf },
}

impl InstanceRef {
    /// Relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<Instance> {
        match self {
            Self::Generated { benchmark, scale, seed } => Ok(benchmark.generate(*scale, *seed)),
            Self::File { path } => {
                let full = base.join(path);
                let f = File::open(&full).with_context(|| format!("opening {}", full.display()))?;
                read_instance(BufReader::new(f)).with_context(|| format!("reading {}", full.display()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub variant: Ablation,
    /// Solver settings; `ablation` and `run_seed` are overwritten per cell.
    #[serde(default)]
    pub config: NhilsConfig,
}

impl AlgorithmSpec {
    pub fn new(variant: Ablation, config: NhilsConfig) -> Self {
        Self { variant, config }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Every run performs exactly this many generations.
    Generations(usize),
    /// The named variant runs its configured generations first; the others
    /// run until they reach its wall time in the same repetition.
    WallTimeMatchedTo(Ablation),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: PathBuf,
    pub fronts: bool,
    pub plots: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { dir: PathBuf::from("results"), fronts: true, plots: true }
    }
}

fn default_repetitions() -> usize {
    5
}

fn default_reference_samples() -> u64 {
    1_000_000
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub seed: u64,
    pub instances: Vec<InstanceRef>,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    pub budget: Budget,
    /// Fresh draws per member when scoring the feasible solution ratio.
    #[serde(default = "default_reference_samples")]
    pub reference_samples: u64,
    /// Reference point offset beyond the nadir, as a fraction of range.
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).context("parsing plan")?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            bail!("plan has no instances");
        }
        if self.algorithms.is_empty() {
            bail!("plan has no algorithms");
        }
        if self.repetitions == 0 {
            bail!("repetitions must be positive");
        }
        if self.reference_samples == 0 {
            bail!("reference_samples must be positive");
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            bail!("margin must be finite and >= 0");
        }
        let mut labels: Vec<&str> = self.algorithms.iter().map(|a| a.variant.name()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            bail!("each variant may appear once per plan");
        }
        if let Budget::WallTimeMatchedTo(anchor) = self.budget {
            if !self.algorithms.iter().any(|a| a.variant == anchor) {
                bail!("budget is matched to `{anchor}`, which is not among the algorithms");
            }
        }
        for a in &self.algorithms {
            a.config.validate().with_context(|| format!("config of `{}`", a.variant))?;
        }
        Ok(())
    }

    /// Seed of one (instance, algorithm, repetition) cell.
    pub fn cell_seed(&self, instance: usize, algorithm: usize, repetition: usize) -> u64 {
        derive_seed(self.seed, &[instance as u64, algorithm as u64, repetition as u64])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = r#"
seed = 7
repetitions = 2
budget = { generations = 10 }

[[instances]]
benchmark = "lab"
scale = "ls1"
seed = 1

[[instances]]
path = "toy.json"

[[algorithms]]
variant = "full"
config = { population_size = 20 }

[[algorithms]]
variant = "plain-nsga2"
"#;

    #[test]
    fn parses_and_round_trips() {
        let plan = ExperimentPlan::from_toml(PLAN).unwrap();
        assert_eq!(plan.instances.len(), 2);
        assert!(matches!(plan.instances[1], InstanceRef::File { .. }));
        assert_eq!(plan.algorithms[0].config.population_size, 20);
        assert_eq!(plan.algorithms[1].config.population_size, 100);
        assert_eq!(plan.budget, Budget::Generations(10));
        assert_eq!(plan.reference_samples, 1_000_000);
        let again = ExperimentPlan::from_toml(&plan.to_toml().unwrap()).unwrap();
        assert_eq!(again, plan);
    }

    #[test]
    fn matched_budget_needs_its_anchor() {
        let text =
            PLAN.replace("budget = { generations = 10 }", "budget = { wall_time_matched_to = \"no-local-search\" }");
        assert!(ExperimentPlan::from_toml(&text).is_err());
        let text = PLAN.replace("budget = { generations = 10 }", "budget = { wall_time_matched_to = \"full\" }");
        assert!(ExperimentPlan::from_toml(&text).is_ok());
    }

    #[test]
    fn cell_seeds_differ() {
        let plan = ExperimentPlan::from_toml(PLAN).unwrap();
        let seeds =
            [plan.cell_seed(0, 0, 0), plan.cell_seed(0, 0, 1), plan.cell_seed(0, 1, 0), plan.cell_seed(1, 0, 0)];
        for i in 0..seeds.len() {
            for j in (i + 1)..seeds.len() {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
    }
}
