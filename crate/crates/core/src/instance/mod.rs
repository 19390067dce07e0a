//! The problem data model: classes of items with deterministic costs and
//! stochastic weights that are only reachable through sampling.

mod generate;
mod io;

pub use generate::{generate_app_instance, generate_lab_instance, Benchmark, Scale, ScaleRow};
pub use io::{read_instance, write_instance, SCHEMA_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::WeightOracle;

/// Distribution of one item's weight.
///
/// The LAB families are continuous parametric laws; `AppRetransmission`
/// models a delay with up to `max_attempts` transmission windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Uniform {
        low: f64,
        high: f64,
    },
    /// Normal(loc, scale) restricted to `[low, high]`.
    TruncatedNormal {
        loc: f64,
        scale: f64,
        low: f64,
        high: f64,
    },
    /// Birnbaum-Saunders law with shape `alpha` and scale `beta`.
    FatigueLife {
        shape: f64,
        scale: f64,
    },
    /// Two-component normal mixture restricted to the nonnegative half-line.
    /// Component one carries probability `weight`.
    Bimodal {
        weight: f64,
        loc1: f64,
        scale1: f64,
        loc2: f64,
        scale2: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    /// Attempt `k` succeeds with `success_prob`; on success the delay is
    /// `(k - 1) * window + window * B` with `B ~ Beta(base_alpha, base_beta)`
    /// kept inside `(0, 1]`. All attempts failing yields `failure_weight`.
    AppRetransmission {
        success_prob: f64,
        window: f64,
        max_attempts: u32,
        base_alpha: f64,
        base_beta: f64,
        failure_weight: f64,
    },
}

impl WeightSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            WeightSpec::Uniform { .. } => "uniform",
            WeightSpec::TruncatedNormal { .. } => "truncated_normal",
            WeightSpec::FatigueLife { .. } => "fatigue_life",
            WeightSpec::Bimodal { .. } => "bimodal",
            WeightSpec::Gamma { .. } => "gamma",
            WeightSpec::AppRetransmission { .. } => "app_retransmission",
        }
    }

    /// The weight if the distribution is a point mass.
    pub fn constant(&self) -> Option<f64> {
        match *self {
            WeightSpec::Uniform { low, high } if low == high => Some(low),
            WeightSpec::TruncatedNormal { low, high, .. } if low == high => Some(low),
            _ => None,
        }
    }

    /// The weight reported for a sample whose transmission failed outright.
    pub fn failure_weight(&self) -> Option<f64> {
        match *self {
            WeightSpec::AppRetransmission { failure_weight, .. } => Some(failure_weight),
            _ => None,
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::invariant(path, what))
            }
        };
        let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
        let positive = |x: f64| x.is_finite() && x > 0.0;
        match *self {
            WeightSpec::Uniform { low, high } => {
                check(finite_nonneg(low) && finite_nonneg(high), "uniform bounds must be finite and >= 0")?;
                check(low <= high, "uniform requires low <= high")
            }
            WeightSpec::TruncatedNormal { loc, scale, low, high } => {
                check(loc.is_finite() && positive(scale), "truncated normal needs finite loc and scale > 0")?;
                check(finite_nonneg(low) && finite_nonneg(high), "truncation bounds must be finite and >= 0")?;
                check(low <= high, "truncated normal requires low <= high")?;
                check(
                    low == high || crate::sampling::dist::normal_mass(loc, scale, low, high) > 0.0,
                    "truncation interval carries no probability mass",
                )
            }
            WeightSpec::FatigueLife { shape, scale } | WeightSpec::Gamma { shape, scale } => {
                check(positive(shape) && positive(scale), "shape and scale must be > 0")
            }
            WeightSpec::Bimodal { weight, loc1, scale1, loc2, scale2 } => {
                check((0.0..=1.0).contains(&weight), "mixture weight must lie in [0, 1]")?;
                check(loc1.is_finite() && loc2.is_finite(), "mixture locations must be finite")?;
                check(positive(scale1) && positive(scale2), "mixture scales must be > 0")?;
                let mass = weight * crate::sampling::dist::normal_mass(loc1, scale1, 0.0, f64::INFINITY)
                    + (1.0 - weight) * crate::sampling::dist::normal_mass(loc2, scale2, 0.0, f64::INFINITY);
                check(mass > 0.0, "mixture has no mass on [0, inf)")
            }
            WeightSpec::AppRetransmission {
                success_prob,
                window,
                max_attempts,
                base_alpha,
                base_beta,
                failure_weight,
            } => {
                check(success_prob > 0.0 && success_prob <= 1.0, "success_prob must lie in (0, 1]")?;
                check(positive(window), "window must be > 0")?;
                check(max_attempts >= 1, "max_attempts must be >= 1")?;
                check(positive(base_alpha) && positive(base_beta), "base delay shape must be > 0")?;
                check(
                    failure_weight.is_finite() && failure_weight > f64::from(max_attempts) * window,
                    "failure_weight must exceed every successful delay",
                )
            }
        }
    }
}

/// One alternative within a class.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub cost: f64,
    pub oracle: WeightOracle,
}

impl Item {
    pub fn new(cost: f64, oracle: WeightOracle) -> Self {
        Self { cost, oracle }
    }

    /// An item whose weight is the constant `weight`, with a bank of `bank_size` copies.
    ///
    /// # Panics
    /// If `weight` is negative or not finite.
    pub fn degenerate(cost: f64, weight: f64, bank_size: usize) -> Self {
        let spec = WeightSpec::Uniform { low: weight, high: weight };
        Self::new(cost, WeightOracle::from_bank(spec, vec![weight; bank_size]).expect("valid constant"))
    }

    pub fn spec(&self) -> &WeightSpec {
        self.oracle.spec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemClass {
    pub items: Vec<Item>,
}

impl ItemClass {
    pub fn new(items: Vec<Item>) -> Self {
        Self { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    classes: Vec<ItemClass>,
    capacity: f64,
    required_confidence: f64,
    empirical_bank_size: usize,
    label: String,
    seed: u64,
}

impl Instance {
    /// Builds an instance and checks every invariant, reporting the first
    /// violation with its field path.
    pub fn new(
        label: impl Into<String>,
        classes: Vec<ItemClass>,
        capacity: f64,
        required_confidence: f64,
        seed: u64,
    ) -> Result<Self> {
        let empirical_bank_size =
            classes.first().and_then(|c| c.items.first()).map(|it| it.oracle.bank().len()).unwrap_or(0);
        let instance = Self { classes, capacity, required_confidence, empirical_bank_size, label: label.into(), seed };
        instance.validate()?;
        Ok(instance)
    }

    /// An instance whose items all have constant weights, given as
    /// `(cost, weight)` pairs per class. Confidence levels are exactly 0 or 1.
    pub fn deterministic(
        label: impl Into<String>,
        classes: &[Vec<(f64, f64)>],
        capacity: f64,
        required_confidence: f64,
    ) -> Result<Self> {
        let mut built = Vec::with_capacity(classes.len());
        for class in classes {
            let mut items = Vec::with_capacity(class.len());
            for &(cost, w) in class {
                let spec = WeightSpec::Uniform { low: w, high: w };
                items.push(Item::new(cost, WeightOracle::from_bank(spec, vec![w])?));
            }
            built.push(ItemClass::new(items));
        }
        let classes = built;
        Self::new(label, classes, capacity, required_confidence, 0)
    }

    fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::invariant("classes", "at least one class is required"));
        }
        if !(self.capacity.is_finite() && self.capacity > 0.0) {
            return Err(Error::invariant("capacity", "capacity must be finite and > 0"));
        }
        if !(self.required_confidence > 0.0 && self.required_confidence < 1.0) {
            return Err(Error::invariant(
                "required_confidence",
                format!("must lie in (0, 1), got {}", self.required_confidence),
            ));
        }
        for (i, class) in self.classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::invariant(format!("classes[{i}].items"), "class has no items"));
            }
        }
        if self.empirical_bank_size == 0 {
            return Err(Error::invariant("empirical_bank_size", "must be positive"));
        }
        for (i, class) in self.classes.iter().enumerate() {
            for (j, item) in class.items.iter().enumerate() {
                let path = format!("classes[{i}].items[{j}]");
                if !(item.cost.is_finite() && item.cost >= 0.0) {
                    return Err(Error::invariant(format!("{path}.cost"), "cost must be finite and >= 0"));
                }
                item.oracle.spec().validate(&format!("{path}.weight"))?;
                if item.oracle.bank().len() != self.empirical_bank_size {
                    return Err(Error::invariant(
                        format!("{path}.bank"),
                        format!(
                            "bank holds {} samples, expected {}",
                            item.oracle.bank().len(),
                            self.empirical_bank_size
                        ),
                    ));
                }
                if let Some(fw) = item.oracle.spec().failure_weight() {
                    if fw <= self.capacity {
                        return Err(Error::invariant(
                            format!("{path}.weight.failure_weight"),
                            "failure weight must exceed capacity",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[ItemClass] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &ItemClass {
        &self.classes[i]
    }

    pub fn item(&self, class: usize, item: usize) -> &Item {
        &self.classes[class].items[item]
    }

    /// Number of items in each class.
    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(ItemClass::len).collect()
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn required_confidence(&self) -> f64 {
        self.required_confidence
    }

    pub fn empirical_bank_size(&self) -> usize {
        self.empirical_bank_size
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of distinct selections, saturating at `u128::MAX`.
    pub fn selection_count(&self) -> u128 {
        self.classes.iter().fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
    }
}
