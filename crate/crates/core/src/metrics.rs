//! Front quality indicators: hypervolume, IGD, IGD+ and the feasible
//! solution ratio, plus reference-set construction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::moea::Solution;
use crate::nhils::FrontPoint;
use crate::opera::estimate_cl_fixed;
use crate::rng::{stream, tag};

/// Default reference-point offset beyond the nadir, as a fraction of range.
pub const DEFAULT_MARGIN: f64 = 0.1;
/// Smallest absolute offset applied to either objective.
pub const MIN_OFFSET: f64 = 1e-6;

/// A point in the minimized objective space `(cost, -cl)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub cost: f64,
    pub neg_cl: f64,
}

impl ObjectivePoint {
    pub fn new(cost: f64, neg_cl: f64) -> Self {
        Self { cost, neg_cl }
    }

    pub fn weakly_dominates(&self, other: &Self) -> bool {
        self.cost <= other.cost && self.neg_cl <= other.neg_cl
    }

    pub fn dominates(&self, other: &Self) -> bool {
        self.weakly_dominates(other) && self != other
    }
}

impl From<FrontPoint> for ObjectivePoint {
    fn from(p: FrontPoint) -> Self {
        Self { cost: p.cost, neg_cl: -p.cl }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceData {
    pub ref_point: ObjectivePoint,
    /// Mutually non-dominated, ascending cost.
    pub ref_set: Vec<ObjectivePoint>,
    pub margin: f64,
}

/// Distinct non-dominated points, ascending cost.
pub fn nondominated_filter(points: &[ObjectivePoint]) -> Vec<ObjectivePoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.neg_cl.total_cmp(&b.neg_cl)));
    let mut out: Vec<ObjectivePoint> = Vec::new();
    for p in sorted {
        if out.last().is_none_or(|q| p.neg_cl < q.neg_cl) {
            out.push(p);
        }
    }
    out
}

/// Global non-dominated set of the union of `fronts`, with a reference point
/// offset beyond its nadir by `margin` times each objective's range.
pub fn build_reference(fronts: &[Vec<ObjectivePoint>], margin: f64) -> Result<ReferenceData> {
    let union: Vec<ObjectivePoint> = fronts.iter().flatten().copied().collect();
    if union.is_empty() {
        return Err(Error::InvalidArgument("cannot build a reference from empty fronts".into()));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidArgument(format!("margin {margin} must be finite and >= 0")));
    }
    let ref_set = nondominated_filter(&union);
    let span = |f: fn(&ObjectivePoint) -> f64| {
        let lo = ref_set.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = ref_set.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        hi + (margin * (hi - lo)).max(MIN_OFFSET)
    };
    let ref_point = ObjectivePoint::new(span(|p| p.cost), span(|p| p.neg_cl));
    Ok(ReferenceData { ref_point, ref_set, margin })
}

/// Exact 2-D hypervolume dominated by `front` and bounded by `ref_point`.
/// Points that do not weakly dominate the reference point add nothing.
pub fn hypervolume(front: &[ObjectivePoint], ref_point: ObjectivePoint) -> f64 {
    let inside: Vec<ObjectivePoint> = front.iter().copied().filter(|p| p.weakly_dominates(&ref_point)).collect();
    let mut area = 0.0;
    let mut ceiling = ref_point.neg_cl;
    for p in nondominated_filter(&inside) {
        area += (ref_point.cost - p.cost) * (ceiling - p.neg_cl);
        ceiling = p.neg_cl;
    }
    area
}

fn mean_nearest(
    front: &[ObjectivePoint],
    ref_set: &[ObjectivePoint],
    d: impl Fn(&ObjectivePoint, &ObjectivePoint) -> f64,
) -> Result<f64> {
    if ref_set.is_empty() {
        return Err(Error::InvalidArgument("reference set is empty".into()));
    }
    if front.is_empty() {
        return Ok(f64::INFINITY);
    }
    let total: f64 = ref_set.iter().map(|r| front.iter().map(|a| d(a, r)).fold(f64::INFINITY, f64::min)).sum();
    Ok(total / ref_set.len() as f64)
}

/// Mean distance from each reference point to its nearest front point.
/// An empty front gives `inf`.
pub fn igd(front: &[ObjectivePoint], ref_set: &[ObjectivePoint]) -> Result<f64> {
    mean_nearest(front, ref_set, |a, r| (a.cost - r.cost).hypot(a.neg_cl - r.neg_cl))
}

/// IGD with the one-sided distance `|max(a - r, 0)|`.
pub fn igd_plus(front: &[ObjectivePoint], ref_set: &[ObjectivePoint]) -> Result<f64> {
    mean_nearest(front, ref_set, |a, r| (a.cost - r.cost).max(0.0).hypot((a.neg_cl - r.neg_cl).max(0.0)))
}

/// Reference confidence level of every member from `reference_samples`
/// fresh draws, member `k` using the stream `(seed, REFERENCE, k)`.
pub fn real_confidence_levels(
    instance: &Instance,
    population: &[Solution],
    reference_samples: u64,
    seed: u64,
) -> Vec<f64> {
    population
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let mut rng = stream(seed, &[tag::REFERENCE, k as u64]);
            estimate_cl_fixed(instance, s, reference_samples, &mut rng).p_hat
        })
        .collect()
}

/// Fraction of members whose reference confidence level meets `P_0`.
pub fn fsr(instance: &Instance, population: &[Solution], reference_samples: u64, seed: u64) -> Result<f64> {
    if population.is_empty() {
        return Err(Error::InvalidArgument("population is empty".into()));
    }
    if reference_samples == 0 {
        return Err(Error::InvalidArgument("reference_samples must be positive".into()));
    }
    let p0 = instance.required_confidence();
    let rcl = real_confidence_levels(instance, population, reference_samples, seed);
    Ok(rcl.iter().filter(|&&p| p >= p0).count() as f64 / population.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: f64, n: f64) -> ObjectivePoint {
        ObjectivePoint::new(c, n)
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume(&[pt(0.0, 0.0)], pt(1.0, 1.0)), 1.0);
        assert_eq!(hypervolume(&[], pt(1.0, 1.0)), 0.0);
        assert_eq!(hypervolume(&[pt(0.0, 0.5), pt(0.5, 0.0)], pt(1.0, 1.0)), 0.75);
        assert_eq!(hypervolume(&[pt(2.0, 0.0)], pt(1.0, 1.0)), 0.0);
    }

    #[test]
    fn igd_examples() {
        let set = [pt(0.0, 1.0), pt(1.0, 0.0)];
        assert_eq!(igd(&set, &set).unwrap(), 0.0);
        assert_eq!(igd_plus(&set, &set).unwrap(), 0.0);
        assert_eq!(igd(&[], &set).unwrap(), f64::INFINITY);
        assert_eq!(igd_plus(&[], &set).unwrap(), f64::INFINITY);
        assert!(igd(&set, &[]).is_err());
        // ref {(0,0),(1,1),(2,0)}, front {(0,1),(2,0)}:
        // IGD  = (1 + 1 + 0) / 3; IGD+ = (1 + 0 + 0) / 3
        let r = [pt(0.0, 0.0), pt(1.0, 1.0), pt(2.0, 0.0)];
        let a = [pt(0.0, 1.0), pt(2.0, 0.0)];
        assert!((igd(&a, &r).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((igd_plus(&a, &r).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reference_from_single_point() {
        let r = build_reference(&[vec![pt(1.0, -1.0)]], DEFAULT_MARGIN).unwrap();
        assert_eq!(r.ref_set, vec![pt(1.0, -1.0)]);
        assert!(r.ref_point.cost > 1.0 && r.ref_point.neg_cl > -1.0);
        assert!(build_reference(&[vec![]], DEFAULT_MARGIN).is_err());
    }

    #[test]
    fn reference_drops_dominated_and_duplicates() {
        let r = build_reference(
            &[vec![pt(1.0, -0.5), pt(2.0, -0.9)], vec![pt(1.0, -0.5), pt(3.0, -0.8), pt(0.5, -0.2)]],
            DEFAULT_MARGIN,
        )
        .unwrap();
        assert_eq!(r.ref_set, vec![pt(0.5, -0.2), pt(1.0, -0.5), pt(2.0, -0.9)]);
        assert!((r.ref_point.cost - 2.15).abs() < 1e-12);
        assert!((r.ref_point.neg_cl - (-0.2 + 0.07)).abs() < 1e-12);
    }

    #[test]
    fn fsr_on_deterministic_members() {
        let inst = Instance::deterministic("t", &[vec![(1.0, 1.0), (0.0, 3.0)]], 2.0, 0.9).unwrap();
        let ok = vec![Solution::new(vec![0]); 3];
        let bad = vec![Solution::new(vec![1]); 3];
        assert_eq!(fsr(&inst, &ok, 1000, 0).unwrap(), 1.0);
        assert_eq!(fsr(&inst, &bad, 1000, 0).unwrap(), 0.0);
        assert!(fsr(&inst, &[], 1000, 0).is_err());
    }
}
