//! Seeded generators for the LAB and APP benchmark families.
//!
//! Each class spreads its items over a "level" `u` in `[0, 1)`: level 0 is the
//! lightest, most reliable (and most expensive) alternative, level 1 the
//! heaviest and cheapest. Levels are stratified so every class covers the
//! whole range.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Instance, Item, ItemClass, WeightSpec};
use crate::rng::{stream, tag, Stream};
use crate::sampling::dist::analytic_moments;
use crate::sampling::WeightOracle;

/// Confidence level required of every benchmark instance.
pub const BENCHMARK_CONFIDENCE: f64 = 0.9;

/// Constants table for the generated families.
mod ranges {
    /// LAB mean weight spans `[0.5, 2.0] * W / m` across a class. A random
    /// selection expects `1.25 * W`, so chance-feasible selections are rare.
    pub const LAB_MEAN_FACTOR: (f64, f64) = (0.5, 2.0);
    /// Coefficient-of-variation range. The upper end keeps the all-lightest
    /// selection surrogate-feasible: `0.5 * (1 + 3 * 0.25) < 1`.
    pub const LAB_CV: (f64, f64) = (0.05, 0.25);
    /// Uniform half-width relative to the mean (cv = h / sqrt 3).
    pub const UNIFORM_HALF_WIDTH: (f64, f64) = (0.1, 0.43);
    /// Truncated-normal cut points in standard deviations from the mean.
    pub const TRUNC_SIGMAS: (f64, f64) = (1.5, 3.0);
    /// Bimodal: relative mode offset, relative component spread, weight of the low mode.
    pub const BIMODAL_OFFSET: (f64, f64) = (0.1, 0.22);
    pub const BIMODAL_SPREAD: (f64, f64) = (0.03, 0.06);
    pub const BIMODAL_WEIGHT: (f64, f64) = (0.3, 0.7);

    /// APP retransmission window and attempt count.
    pub const APP_WINDOW_MS: f64 = 10.0;
    pub const APP_ATTEMPTS: u32 = 4;
    /// Per-attempt success probability from level 0 to level 1.
    pub const APP_SUCCESS: (f64, f64) = (0.999, 0.9);
    /// Mean in-window delay as a fraction of the window, level 0 to level 1.
    pub const APP_BASE_FRACTION: (f64, f64) = (0.02, 0.25);
    pub const APP_BASE_JITTER: f64 = 0.03;
    /// First Beta shape of the in-window delay; the second follows from the mean.
    pub const APP_BASE_SHAPE: (f64, f64) = (1.5, 4.0);

    /// Costs are distinct integers drawn from this range.
    pub const COST_RANGE: u32 = 100;
}

/// Benchmark family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Lab,
    App,
}

impl Benchmark {
    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Lab => "LAB",
            Benchmark::App => "APP",
        }
    }

    pub fn generate(self, scale: Scale, seed: u64) -> Instance {
        match self {
            Benchmark::Lab => generate_lab_instance(scale, seed),
            Benchmark::App => generate_app_instance(scale, seed),
        }
    }
}

impl FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lab" => Ok(Benchmark::Lab),
            "app" => Ok(Benchmark::App),
            other => Err(format!("unknown benchmark family `{other}` (expected lab or app)")),
        }
    }
}

/// Instance scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Ls1,
    Ls2,
    Ls3,
    Ls4,
    Ls5,
    Ls6,
}

/// One row of the scale table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRow {
    pub classes: usize,
    pub items_per_class: usize,
    pub bank_size: usize,
    pub lab_capacity: f64,
    pub app_capacity: f64,
}

impl Scale {
    pub const ALL: [Scale; 6] = [Scale::Ls1, Scale::Ls2, Scale::Ls3, Scale::Ls4, Scale::Ls5, Scale::Ls6];

    pub fn row(self) -> ScaleRow {
        let (classes, items_per_class, lab_capacity, app_capacity) = match self {
            Scale::Ls1 => (10, 10, 20.0, 35.0),
            Scale::Ls2 => (10, 20, 14.0, 15.0),
            Scale::Ls3 => (20, 10, 30.0, 41.0),
            Scale::Ls4 => (30, 10, 45.0, 60.0),
            Scale::Ls5 => (40, 10, 58.0, 87.0),
            Scale::Ls6 => (50, 10, 68.0, 97.0),
        };
        ScaleRow { classes, items_per_class, bank_size: 500, lab_capacity, app_capacity }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scale::Ls1 => "ls1",
            Scale::Ls2 => "ls2",
            Scale::Ls3 => "ls3",
            Scale::Ls4 => "ls4",
            Scale::Ls5 => "ls5",
            Scale::Ls6 => "ls6",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scale::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scale `{s}` (expected ls1..ls6)"))
    }
}

fn draw_in<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Stratified levels, one per item, in random order.
fn levels(n: usize, rng: &mut Stream) -> Vec<f64> {
    let perm = index::sample(rng, n, n).into_vec();
    perm.into_iter().map(|p| (p as f64 + rng.random::<f64>()) / n as f64).collect()
}

/// Distinct integer costs, the largest going to the lightest expected weight.
fn assign_costs(expected_weights: &[f64], rng: &mut Stream) -> Vec<f64> {
    let n = expected_weights.len();
    let mut pool: Vec<u32> =
        index::sample(rng, ranges::COST_RANGE as usize, n).into_iter().map(|c| c as u32 + 1).collect();
    pool.sort_unstable_by(|a, b| b.cmp(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| expected_weights[a].total_cmp(&expected_weights[b]).then(a.cmp(&b)));
    let mut costs = vec![0.0; n];
    for (rank, &item) in order.iter().enumerate() {
        costs[item] = f64::from(pool[rank]);
    }
    costs
}

const LAB_FAMILIES: [&str; 5] = ["uniform", "truncated_normal", "fatigue_life", "bimodal", "gamma"];

/// A LAB weight law of the given family with mean `mean`.
fn lab_spec(family: &str, mean: f64, rng: &mut Stream) -> WeightSpec {
    match family {
        "uniform" => {
            let h = draw_in(rng, ranges::UNIFORM_HALF_WIDTH);
            WeightSpec::Uniform { low: mean * (1.0 - h), high: mean * (1.0 + h) }
        }
        "truncated_normal" => {
            let cv = draw_in(rng, ranges::LAB_CV);
            let k = draw_in(rng, ranges::TRUNC_SIGMAS);
            let scale = cv * mean;
            WeightSpec::TruncatedNormal { loc: mean, scale, low: mean - k * scale, high: mean + k * scale }
        }
        "fatigue_life" => {
            let shape = draw_in(rng, ranges::LAB_CV);
            WeightSpec::FatigueLife { shape, scale: mean / (1.0 + shape * shape / 2.0) }
        }
        "bimodal" => {
            let d = draw_in(rng, ranges::BIMODAL_OFFSET);
            let s = draw_in(rng, ranges::BIMODAL_SPREAD);
            let weight = draw_in(rng, ranges::BIMODAL_WEIGHT);
            let unit = WeightSpec::Bimodal { weight, loc1: 1.0 - d, scale1: s, loc2: 1.0 + d, scale2: s };
            let k = mean / analytic_moments(&unit).0;
            WeightSpec::Bimodal { weight, loc1: k * (1.0 - d), scale1: k * s, loc2: k * (1.0 + d), scale2: k * s }
        }
        "gamma" => {
            let cv = draw_in(rng, ranges::LAB_CV);
            let shape = 1.0 / (cv * cv);
            WeightSpec::Gamma { shape, scale: mean / shape }
        }
        _ => unreachable!("fixed family table"),
    }
}

fn app_spec(level: f64, capacity: f64, rng: &mut Stream) -> WeightSpec {
    let lerp = |(a, b): (f64, f64), t: f64| a + (b - a) * t;
    let success_prob = lerp(ranges::APP_SUCCESS, level);
    let jitter = ranges::APP_BASE_JITTER * (2.0 * rng.random::<f64>() - 1.0);
    let fraction = (lerp(ranges::APP_BASE_FRACTION, level) + jitter).clamp(0.01, 0.5);
    let alpha = draw_in(rng, ranges::APP_BASE_SHAPE);
    WeightSpec::AppRetransmission {
        success_prob,
        window: ranges::APP_WINDOW_MS,
        max_attempts: ranges::APP_ATTEMPTS,
        base_alpha: alpha,
        base_beta: alpha * (1.0 - fraction) / fraction,
        failure_weight: capacity + f64::from(ranges::APP_ATTEMPTS) * ranges::APP_WINDOW_MS,
    }
}

fn build(
    benchmark: Benchmark,
    scale: Scale,
    seed: u64,
    capacity: f64,
    spec_for: impl Fn(usize, usize, f64, &mut Stream) -> WeightSpec,
) -> Instance {
    let row = scale.row();
    let classes = (0..row.classes)
        .map(|i| {
            let mut rng = stream(seed, &[tag::GENERATOR, benchmark as u64, i as u64]);
            let lv = levels(row.items_per_class, &mut rng);
            let specs: Vec<WeightSpec> = lv.iter().enumerate().map(|(j, &u)| spec_for(i, j, u, &mut rng)).collect();
            let means: Vec<f64> = specs.iter().map(|s| analytic_moments(s).0).collect();
            let costs = assign_costs(&means, &mut rng);
            let items = specs
                .into_iter()
                .zip(costs)
                .enumerate()
                .map(|(j, (spec, cost))| {
                    let mut bank_rng = stream(seed, &[tag::BANK, benchmark as u64, i as u64, j as u64]);
                    let oracle = WeightOracle::sample_bank(spec, row.bank_size, &mut bank_rng)
                        .expect("generator emits valid specs");
                    Item::new(cost, oracle)
                })
                .collect();
            ItemClass::new(items)
        })
        .collect();
    let label = format!("{}-{}", benchmark.name(), scale.name());
    Instance::new(label, classes, capacity, BENCHMARK_CONFIDENCE, seed).expect("generator emits valid instances")
}

/// LAB instance: item weights from five continuous families, assigned round-robin.
pub fn generate_lab_instance(scale: Scale, seed: u64) -> Instance {
    let row = scale.row();
    let unit = row.lab_capacity / row.classes as f64;
    let (lo, hi) = ranges::LAB_MEAN_FACTOR;
    build(Benchmark::Lab, scale, seed, row.lab_capacity, |i, j, u, rng| {
        let family = LAB_FAMILIES[(i * row.items_per_class + j) % LAB_FAMILIES.len()];
        lab_spec(family, unit * (lo + (hi - lo) * u), rng)
    })
}

/// APP instance: every item is a retransmission delay with four attempts.
pub fn generate_app_instance(scale: Scale, seed: u64) -> Instance {
    let capacity = scale.row().app_capacity;
    build(Benchmark::App, scale, seed, capacity, |_, _, u, rng| app_spec(u, capacity, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let expect = [
            (Scale::Ls1, 10, 10, 20.0, 35.0),
            (Scale::Ls2, 10, 20, 14.0, 15.0),
            (Scale::Ls3, 20, 10, 30.0, 41.0),
            (Scale::Ls4, 30, 10, 45.0, 60.0),
            (Scale::Ls5, 40, 10, 58.0, 87.0),
            (Scale::Ls6, 50, 10, 68.0, 97.0),
        ];
        for (s, m, n, wl, wa) in expect {
            let r = s.row();
            assert_eq!((r.classes, r.items_per_class, r.bank_size), (m, n, 500));
            assert_eq!((r.lab_capacity, r.app_capacity), (wl, wa));
        }
    }

    #[test]
    fn lab_ls1_shape() {
        let inst = generate_lab_instance(Scale::Ls1, 42);
        assert_eq!(inst.class_count(), 10);
        assert!(inst.classes().iter().all(|c| c.len() == 10));
        assert_eq!(inst.empirical_bank_size(), 500);
        assert_eq!(inst.capacity(), 20.0);
        assert_eq!(inst.label(), "LAB-ls1");
        assert_eq!(inst.required_confidence(), 0.9);
    }

    #[test]
    fn app_ls4_shape() {
        let inst = generate_app_instance(Scale::Ls4, 3);
        assert_eq!((inst.class_count(), inst.class(0).len(), inst.capacity()), (30, 10, 60.0));
        assert!(inst
            .classes()
            .iter()
            .flat_map(|c| &c.items)
            .all(|it| matches!(it.spec(), WeightSpec::AppRetransmission { .. })));
    }

    #[test]
    fn lab_families_round_robin() {
        let inst = generate_lab_instance(Scale::Ls1, 1);
        let names: Vec<&str> = inst.class(0).items.iter().map(|it| it.spec().family_name()).collect();
        assert_eq!(&names[..5], &LAB_FAMILIES);
        assert_eq!(&names[5..], &LAB_FAMILIES);
    }

    #[test]
    fn costs_strictly_decrease_with_expected_weight() {
        for inst in [generate_lab_instance(Scale::Ls2, 9), generate_app_instance(Scale::Ls2, 9)] {
            for class in inst.classes() {
                let mut pairs: Vec<(f64, f64)> =
                    class.items.iter().map(|it| (analytic_moments(it.spec()).0, it.cost)).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                assert!(pairs.windows(2).all(|w| w[0].1 > w[1].1));
                assert!(pairs.iter().all(|p| (1.0..=100.0).contains(&p.1) && p.1.fract() == 0.0));
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate_lab_instance(Scale::Ls1, 42), generate_lab_instance(Scale::Ls1, 42));
        assert_eq!(generate_app_instance(Scale::Ls2, 7), generate_app_instance(Scale::Ls2, 7));
        assert_ne!(generate_lab_instance(Scale::Ls1, 1), generate_lab_instance(Scale::Ls1, 2));
    }

    #[test]
    fn parse_names() {
        assert_eq!("LS3".parse::<Scale>().unwrap(), Scale::Ls3);
        assert!("ls7".parse::<Scale>().is_err());
        assert_eq!("app".parse::<Benchmark>().unwrap(), Benchmark::App);
    }
}
