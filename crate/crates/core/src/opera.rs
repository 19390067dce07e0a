//! Chance-constraint estimation: a fixed-budget Monte-Carlo estimator and a
//! staged estimator that stops early once a running estimate falls below the
//! stage threshold, plus the concentration-bound calculators that justify it.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::moea::Solution;
use crate::sampling::CapacityCounter;

/// A stage threshold. `Unbounded` compares greater than every real, so the
/// final stage always returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThresholdRepr", into = "ThresholdRepr")]
pub enum Threshold {
    Finite(f64),
    Unbounded,
}

impl Threshold {
    /// True when `p_hat < self`, i.e. evaluation stops at this stage.
    pub fn rejects(self, p_hat: f64) -> bool {
        match self {
            Threshold::Finite(t) => p_hat < t,
            Threshold::Unbounded => true,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Finite(t) => write!(f, "{t}"),
            Threshold::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThresholdRepr {
    Value(f64),
    Word(String),
}

impl TryFrom<ThresholdRepr> for Threshold {
    type Error = String;

    fn try_from(r: ThresholdRepr) -> std::result::Result<Self, String> {
        match r {
            ThresholdRepr::Value(v) => Ok(Threshold::Finite(v)),
            ThresholdRepr::Word(w) if matches!(w.as_str(), "inf" | "unbounded") => Ok(Threshold::Unbounded),
            ThresholdRepr::Word(w) => Err(format!("threshold must be a number or \"inf\", got `{w}`")),
        }
    }
}

impl From<Threshold> for ThresholdRepr {
    fn from(t: Threshold) -> Self {
        match t {
            Threshold::Finite(v) => ThresholdRepr::Value(v),
            Threshold::Unbounded => ThresholdRepr::Word("inf".into()),
        }
    }
}

/// Cumulative sample sizes `T_1 < ... < T_K` and thresholds
/// `P_1 <= ... <= P_{K-1} < P_K = inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct StageSchedule {
    cumulative_samples: Vec<u64>,
    thresholds: Vec<Threshold>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRepr {
    cumulative_samples: Vec<u64>,
    thresholds: Vec<Threshold>,
}

impl TryFrom<ScheduleRepr> for StageSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        StageSchedule::new(r.cumulative_samples, r.thresholds)
    }
}

impl From<StageSchedule> for ScheduleRepr {
    fn from(s: StageSchedule) -> Self {
        ScheduleRepr { cumulative_samples: s.cumulative_samples, thresholds: s.thresholds }
    }
}

impl StageSchedule {
    pub fn new(cumulative_samples: Vec<u64>, thresholds: Vec<Threshold>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("stage schedule: {msg}")));
        if cumulative_samples.is_empty() || cumulative_samples.len() != thresholds.len() {
            return bad("needs K >= 1 stages with one threshold per stage");
        }
        if cumulative_samples[0] == 0 || cumulative_samples.windows(2).any(|w| w[0] >= w[1]) {
            return bad("cumulative sample sizes must be positive and strictly increasing");
        }
        let (last, rest) = thresholds.split_last().expect("non-empty");
        if *last != Threshold::Unbounded {
            return bad("final threshold must be unbounded");
        }
        let mut prev = f64::NEG_INFINITY;
        for t in rest {
            match *t {
                Threshold::Finite(v) if (0.0..=1.0).contains(&v) && v >= prev => prev = v,
                Threshold::Finite(_) => return bad("intermediate thresholds must be nondecreasing in [0, 1]"),
                Threshold::Unbounded => return bad("only the final threshold may be unbounded"),
            }
        }
        Ok(Self { cumulative_samples, thresholds })
    }

    /// `T = [1e4, 1e5, 1e6]`, `C = [0.999, 0.9999, inf]`.
    pub fn standard() -> Self {
        Self::new(
            vec![10_000, 100_000, 1_000_000],
            vec![Threshold::Finite(0.999), Threshold::Finite(0.9999), Threshold::Unbounded],
        )
        .expect("valid")
    }

    /// A single stage of `samples`, equivalent to fixed-budget estimation.
    pub fn single(samples: u64) -> Result<Self> {
        Self::new(vec![samples], vec![Threshold::Unbounded])
    }

    pub fn stages(&self) -> usize {
        self.cumulative_samples.len()
    }

    pub fn cumulative_samples(&self) -> &[u64] {
        &self.cumulative_samples
    }

    pub fn thresholds(&self) -> &[Threshold] {
        &self.thresholds
    }

    pub fn max_samples(&self) -> u64 {
        *self.cumulative_samples.last().expect("non-empty")
    }
}

impl Default for StageSchedule {
    fn default() -> Self {
        Self::standard()
    }
}

impl fmt::Display for StageSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (t, c)) in self.cumulative_samples.iter().zip(&self.thresholds).enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}:{c}")?;
        }
        Ok(())
    }
}

/// Parses `T1:C1,T2:C2,...`, e.g. `10000:0.999,100000:0.9999,1000000:inf`.
impl std::str::FromStr for StageSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("stage schedule `{s}`: expected T1:C1,T2:C2,..."));
        let mut samples = Vec::new();
        let mut thresholds = Vec::new();
        for stage in s.split(',') {
            let (t, c) = stage.trim().split_once(':').ok_or_else(bad)?;
            samples.push(t.trim().parse().map_err(|_| bad())?);
            thresholds.push(match c.trim() {
                "inf" | "unbounded" => Threshold::Unbounded,
                v => Threshold::Finite(v.parse().map_err(|_| bad())?),
            });
        }
        Self::new(samples, thresholds)
    }
}

/// Result of one confidence-level estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClEstimate {
    pub p_hat: f64,
    pub samples_used: u64,
    /// One-based stage at which evaluation stopped.
    pub stage_reached: usize,
    pub early_stopped: bool,
}

/// Plain Monte-Carlo estimate over `sample_count` fresh total-weight draws.
///
/// # Panics
/// If `sample_count` is zero.
pub fn estimate_cl_fixed<R: Rng + ?Sized>(
    instance: &Instance,
    solution: &Solution,
    sample_count: u64,
    rng: &mut R,
) -> ClEstimate {
    assert!(sample_count > 0, "sample_count must be positive");
    let hits = CapacityCounter::new(instance, solution).count(sample_count, rng);
    ClEstimate {
        p_hat: hits as f64 / sample_count as f64,
        samples_used: sample_count,
        stage_reached: 1,
        early_stopped: false,
    }
}

/// Staged estimate: stage `k` adds `T_k - T_{k-1}` draws, re-estimates over
/// all draws so far and stops when `p_hat < P_k`.
pub fn estimate_cl_opera<R: Rng + ?Sized>(
    instance: &Instance,
    solution: &Solution,
    schedule: &StageSchedule,
    rng: &mut R,
) -> ClEstimate {
    let counter = CapacityCounter::new(instance, solution);
    let last = schedule.stages() - 1;
    let (mut hits, mut total) = (0u64, 0u64);
    for (k, (&target, &threshold)) in schedule.cumulative_samples.iter().zip(&schedule.thresholds).enumerate() {
        hits += counter.count(target - total, rng);
        total = target;
        let p_hat = hits as f64 / total as f64;
        if threshold.rejects(p_hat) {
            return ClEstimate { p_hat, samples_used: total, stage_reached: k + 1, early_stopped: k < last };
        }
    }
    unreachable!("final threshold is unbounded")
}

/// Tight and simplified forms of the pairwise order-preservation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderBound {
    /// `exp(-2 gap^2 / (1/n_b + 1/n_a))`
    pub tight: f64,
    /// `exp(-n_b gap^2)`
    pub simplified: f64,
}

/// Upper bound on `P(p_hat_b >= p_hat_a)` when `p_a - p_b = p_gap` and the
/// better solution received `n_a >= n_b` samples.
pub fn order_error_bound(p_gap: f64, n_a: u64, n_b: u64) -> Result<OrderBound> {
    if !(0.0..=1.0).contains(&p_gap) {
        return Err(Error::InvalidArgument(format!("p_gap must lie in [0, 1], got {p_gap}")));
    }
    if n_a == 0 || n_b == 0 {
        return Err(Error::InvalidArgument("sample counts must be positive".into()));
    }
    if n_b > n_a {
        return Err(Error::InvalidArgument(format!("requires n_b <= n_a, got n_b={n_b} > n_a={n_a}")));
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let g2 = p_gap * p_gap;
    Ok(OrderBound { tight: (-2.0 * g2 / (1.0 / nb + 1.0 / na)).exp(), simplified: (-nb * g2).exp() })
}

/// Concentration inequality used to size a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleBound {
    Hoeffding,
    Chernoff,
}

/// Smallest `L` with `exp(-2 L eps^2) <= 1/2` (Hoeffding); the Chernoff row is
/// twice the unrounded Hoeffding value.
pub fn min_sample_size(epsilon: f64, bound: SampleBound) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let hoeffding = std::f64::consts::LN_2 / (2.0 * epsilon * epsilon);
    let raw = match bound {
        SampleBound::Hoeffding => hoeffding,
        SampleBound::Chernoff => 2.0 * hoeffding,
    };
    Ok(raw.ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Item, ItemClass, WeightSpec};
    use crate::rng::stream;
    use crate::sampling::WeightOracle;

    #[test]
    fn schedule_text_round_trip() {
        let s = StageSchedule::standard();
        assert_eq!(s.to_string(), "10000:0.999,100000:0.9999,1000000:inf");
        assert_eq!(s.to_string().parse::<StageSchedule>().unwrap(), s);
        assert!("10:0.5".parse::<StageSchedule>().is_err());
        assert!("x".parse::<StageSchedule>().is_err());
    }

    fn constant(total: f64, capacity: f64) -> (Instance, Solution) {
        let classes = vec![ItemClass::new(vec![Item::degenerate(1.0, total, 2)])];
        (Instance::new("c", classes, capacity, 0.9, 0).unwrap(), Solution::new(vec![0]))
    }

    /// One uniform(0, 1) item, so P(weight <= capacity) = capacity.
    pub(crate) fn uniform_item(capacity: f64) -> (Instance, Solution) {
        let spec = WeightSpec::Uniform { low: 0.0, high: 1.0 };
        let oracle = WeightOracle::sample_bank(spec, 10, &mut stream(0, &[])).unwrap();
        let classes = vec![ItemClass::new(vec![Item::new(1.0, oracle)])];
        (Instance::new("u", classes, capacity, 0.9, 0).unwrap(), Solution::new(vec![0]))
    }

    #[test]
    fn fixed_on_constants() {
        let (i, s) = constant(5.0, 10.0);
        assert_eq!(estimate_cl_fixed(&i, &s, 100, &mut stream(0, &[])).p_hat, 1.0);
        let (i, s) = constant(15.0, 10.0);
        let e = estimate_cl_fixed(&i, &s, 100, &mut stream(0, &[]));
        assert_eq!((e.p_hat, e.samples_used, e.early_stopped), (0.0, 100, false));
    }

    #[test]
    fn fixed_matches_uniform_cdf() {
        let (i, s) = uniform_item(0.5);
        let e = estimate_cl_fixed(&i, &s, 1_000_000, &mut stream(1, &[]));
        assert!((e.p_hat - 0.5).abs() < 0.002, "{}", e.p_hat);
    }

    #[test]
    fn opera_stops_infeasible_at_stage_one() {
        let (i, s) = constant(15.0, 10.0);
        let e = estimate_cl_opera(&i, &s, &StageSchedule::standard(), &mut stream(0, &[]));
        assert_eq!(e, ClEstimate { p_hat: 0.0, samples_used: 10_000, stage_reached: 1, early_stopped: true });
    }

    #[test]
    fn opera_runs_feasible_to_completion() {
        let (i, s) = constant(5.0, 10.0);
        let e = estimate_cl_opera(&i, &s, &StageSchedule::standard(), &mut stream(0, &[]));
        assert_eq!(e, ClEstimate { p_hat: 1.0, samples_used: 1_000_000, stage_reached: 3, early_stopped: false });
    }

    #[test]
    fn opera_half_solution_stops_early() {
        // P(no stop at stage 1) <= exp(-2e4 * 0.499^2), i.e. never in practice.
        let (i, s) = uniform_item(0.5);
        let sched = StageSchedule::standard();
        for seed in 0..50 {
            let e = estimate_cl_opera(&i, &s, &sched, &mut stream(seed, &[]));
            assert!(e.early_stopped && e.stage_reached == 1 && e.samples_used == 10_000);
        }
    }

    #[test]
    fn one_stage_schedule_is_the_fixed_estimator() {
        let (i, s) = uniform_item(0.3);
        let sched = StageSchedule::single(5_000).unwrap();
        for seed in 0..5 {
            let a = estimate_cl_opera(&i, &s, &sched, &mut stream(seed, &[]));
            let b = estimate_cl_fixed(&i, &s, 5_000, &mut stream(seed, &[]));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn schedule_validation() {
        use Threshold::*;
        assert!(StageSchedule::new(vec![], vec![]).is_err());
        assert!(StageSchedule::new(vec![10, 10], vec![Finite(0.5), Unbounded]).is_err());
        assert!(StageSchedule::new(vec![10, 20], vec![Finite(0.5), Finite(0.6)]).is_err());
        assert!(StageSchedule::new(vec![10, 20, 30], vec![Finite(0.7), Finite(0.6), Unbounded]).is_err());
        assert!(StageSchedule::new(vec![10, 20], vec![Finite(1.5), Unbounded]).is_err());
        assert!(StageSchedule::new(vec![0, 20], vec![Finite(0.5), Unbounded]).is_err());
        let s: StageSchedule =
            serde_json::from_str(r#"{"cumulative_samples":[10000,100000,1000000],"thresholds":[0.999,0.9999,"inf"]}"#)
                .unwrap();
        assert_eq!(s, StageSchedule::standard());
        assert_eq!(serde_json::from_str::<StageSchedule>(&serde_json::to_string(&s).unwrap()).unwrap(), s);
    }

    #[test]
    fn order_bound_values() {
        let b = order_error_bound(0.0, 10, 10).unwrap();
        assert_eq!((b.tight, b.simplified), (1.0, 1.0));
        let b = order_error_bound(0.1, 1000, 1000).unwrap();
        assert!((b.tight - (-10.0f64).exp()).abs() < 1e-15);
        assert!((b.tight - 4.54e-5).abs() < 1e-7);
        let b = order_error_bound(0.1, 1_000_000, 1000).unwrap();
        assert!(b.tight <= b.simplified);
        assert!((b.simplified - (-10.0f64).exp()).abs() < 1e-15);
        assert!(order_error_bound(0.1, 10, 20).is_err());
        assert!(order_error_bound(-0.1, 10, 10).is_err());
    }

    #[test]
    fn sample_size_rows() {
        use SampleBound::*;
        assert_eq!(min_sample_size(0.05, Hoeffding).unwrap(), 139);
        assert_eq!(min_sample_size(0.005, Hoeffding).unwrap(), 13863);
        assert_eq!(min_sample_size(0.05, Chernoff).unwrap(), 278);
        assert_eq!(min_sample_size(0.00005, Hoeffding).unwrap(), 138_629_437);
        assert!(min_sample_size(0.0, Hoeffding).is_err());
        assert!(min_sample_size(1.0, Chernoff).is_err());
    }
}
