//! Variate generation and analytic moments for the weight families.
//!
//! Truncated normals use plain rejection from the untruncated law when the
//! interval holds at least a quarter of the mass, and inverse-CDF through
//! `erfc`/`erfc_inv` otherwise. The inverse is taken on the survival side for
//! intervals in the upper tail so that far-tail intervals keep full precision.

use libm::erfc;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::instance::WeightSpec;

const REJECTION_MIN_MASS: f64 = 0.25;

/// Standard normal survival function `P(Z > x)`.
pub(crate) fn survival(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal CDF.
pub(crate) fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
    }
}

/// Mass of `Normal(loc, scale)` on `[low, high]`.
pub(crate) fn normal_mass(loc: f64, scale: f64, low: f64, high: f64) -> f64 {
    let a = (low - loc) / scale;
    let b = (high - loc) / scale;
    standard_mass(a, b)
}

fn standard_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        survival(a) - survival(b)
    } else if b <= 0.0 {
        cdf(b) - cdf(a)
    } else {
        1.0 - cdf(a) - survival(b)
    }
}

/// Mean and variance of a standard normal restricted to `[a, b]`.
fn standard_truncated_moments(a: f64, b: f64) -> (f64, f64) {
    let z = standard_mass(a, b);
    let (pa, pb) = (pdf(a), pdf(b));
    let apa = if a.is_infinite() { 0.0 } else { a * pa };
    let bpb = if b.is_infinite() { 0.0 } else { b * pb };
    let mean = (pa - pb) / z;
    let var = 1.0 + (apa - bpb) / z - mean * mean;
    (mean, var)
}

fn truncated_normal_moments(loc: f64, scale: f64, low: f64, high: f64) -> (f64, f64) {
    let (m, v) = standard_truncated_moments((low - loc) / scale, (high - loc) / scale);
    (loc + scale * m, scale * scale * v)
}

/// Analytic mean and variance of a weight family.
pub fn analytic_moments(spec: &WeightSpec) -> (f64, f64) {
    match *spec {
        WeightSpec::Uniform { low, high } => ((low + high) / 2.0, (high - low).powi(2) / 12.0),
        WeightSpec::TruncatedNormal { loc, scale, low, high } => {
            if low == high {
                (low, 0.0)
            } else {
                truncated_normal_moments(loc, scale, low, high)
            }
        }
        WeightSpec::FatigueLife { shape, scale } => {
            let a2 = shape * shape;
            (scale * (1.0 + a2 / 2.0), a2 * scale * scale * (1.0 + 1.25 * a2))
        }
        WeightSpec::Bimodal { weight, loc1, scale1, loc2, scale2 } => {
            let comp = |loc: f64, scale: f64| {
                let z = normal_mass(loc, scale, 0.0, f64::INFINITY);
                let (m, v) = truncated_normal_moments(loc, scale, 0.0, f64::INFINITY);
                (z, m, v + m * m)
            };
            let (z1, m1, s1) = comp(loc1, scale1);
            let (z2, m2, s2) = comp(loc2, scale2);
            let (w1, w2) = (weight * z1, (1.0 - weight) * z2);
            let total = w1 + w2;
            let mean = (w1 * m1 + w2 * m2) / total;
            let second = (w1 * s1 + w2 * s2) / total;
            (mean, second - mean * mean)
        }
        WeightSpec::Gamma { shape, scale } => (shape * scale, shape * scale * scale),
        WeightSpec::AppRetransmission { success_prob, window, max_attempts, base_alpha, base_beta, failure_weight } => {
            let ab = base_alpha + base_beta;
            let b_mean = base_alpha / ab;
            let b_second = base_alpha * base_beta / (ab * ab * (ab + 1.0)) + b_mean * b_mean;
            let q = 1.0 - success_prob;
            let (mut mean, mut second) = (0.0, 0.0);
            for k in 0..max_attempts {
                let pk = q.powi(k as i32) * success_prob;
                let offset = f64::from(k) * window;
                mean += pk * (offset + window * b_mean);
                second += pk * (offset * offset + 2.0 * offset * window * b_mean + window * window * b_second);
            }
            let pf = q.powi(max_attempts as i32);
            mean += pf * failure_weight;
            second += pf * failure_weight * failure_weight;
            (mean, second - mean * mean)
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum TruncMethod {
    Rejection,
    /// Inverse CDF on `[a, b]`; `flip` mirrors an interval in the lower tail.
    Inverse {
        lo_tail: f64,
        hi_tail: f64,
        flip: bool,
        upper: bool,
    },
}

/// A ready-to-draw sampler built once per item.
#[derive(Debug, Clone)]
pub(crate) enum Sampler {
    Constant(f64),
    Uniform {
        low: f64,
        width: f64,
    },
    TruncatedNormal {
        loc: f64,
        scale: f64,
        a: f64,
        b: f64,
        method: TruncMethod,
    },
    FatigueLife {
        half_shape: f64,
        scale: f64,
    },
    Bimodal {
        weight: f64,
        loc1: f64,
        scale1: f64,
        loc2: f64,
        scale2: f64,
    },
    Gamma(Gamma<f64>),
    /// The base delay fraction is `X / (X + Y)` with `X ~ Gamma(alpha)`, `Y ~ Gamma(beta)`.
    App {
        success_prob: f64,
        window: f64,
        max_attempts: u32,
        base_x: Gamma<f64>,
        base_y: Gamma<f64>,
        failure_weight: f64,
    },
}

impl Sampler {
    /// Builds the sampler. `spec` must already be validated.
    pub(crate) fn new(spec: &WeightSpec) -> Self {
        if let Some(c) = spec.constant() {
            return Sampler::Constant(c);
        }
        match *spec {
            WeightSpec::Uniform { low, high } => Sampler::Uniform { low, width: high - low },
            WeightSpec::TruncatedNormal { loc, scale, low, high } => {
                let a = (low - loc) / scale;
                let b = (high - loc) / scale;
                let method = if standard_mass(a, b) >= REJECTION_MIN_MASS {
                    TruncMethod::Rejection
                } else if a >= 0.0 {
                    TruncMethod::Inverse { lo_tail: survival(b), hi_tail: survival(a), flip: false, upper: true }
                } else if b <= 0.0 {
                    TruncMethod::Inverse { lo_tail: survival(-a), hi_tail: survival(-b), flip: true, upper: true }
                } else {
                    TruncMethod::Inverse { lo_tail: cdf(a), hi_tail: cdf(b), flip: false, upper: false }
                };
                Sampler::TruncatedNormal { loc, scale, a, b, method }
            }
            WeightSpec::FatigueLife { shape, scale } => Sampler::FatigueLife { half_shape: shape / 2.0, scale },
            WeightSpec::Bimodal { weight, loc1, scale1, loc2, scale2 } => {
                Sampler::Bimodal { weight, loc1, scale1, loc2, scale2 }
            }
            WeightSpec::Gamma { shape, scale } => Sampler::Gamma(Gamma::new(shape, scale).expect("validated gamma")),
            WeightSpec::AppRetransmission {
                success_prob,
                window,
                max_attempts,
                base_alpha,
                base_beta,
                failure_weight,
            } => Sampler::App {
                success_prob,
                window,
                max_attempts,
                base_x: Gamma::new(base_alpha, 1.0).expect("validated beta"),
                base_y: Gamma::new(base_beta, 1.0).expect("validated beta"),
                failure_weight,
            },
        }
    }

    pub(crate) fn constant(&self) -> Option<f64> {
        match *self {
            Sampler::Constant(c) => Some(c),
            _ => None,
        }
    }

    #[inline]
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Constant(c) => *c,
            Sampler::Uniform { low, width } => low + width * rng.random::<f64>(),
            Sampler::TruncatedNormal { loc, scale, a, b, method } => {
                loc + scale * sample_standard_truncated(*a, *b, method, rng)
            }
            Sampler::FatigueLife { half_shape, scale } => {
                let z: f64 = rng.sample(StandardNormal);
                let t = half_shape * z;
                let root = t + (t * t + 1.0).sqrt();
                scale * root * root
            }
            Sampler::Bimodal { weight, loc1, scale1, loc2, scale2 } => loop {
                let (loc, scale) = if rng.random::<f64>() < *weight { (loc1, scale1) } else { (loc2, scale2) };
                let z: f64 = rng.sample(StandardNormal);
                let x = loc + scale * z;
                if x >= 0.0 {
                    break x;
                }
            },
            Sampler::Gamma(g) => g.sample(rng),
            Sampler::App { success_prob, window, max_attempts, base_x, base_y, failure_weight } => {
                for k in 0..*max_attempts {
                    if rng.random::<f64>() < *success_prob {
                        let x = base_x.sample(rng);
                        let mut u = x / (x + base_y.sample(rng));
                        if u <= 0.0 {
                            u = f64::MIN_POSITIVE;
                        }
                        return f64::from(k) * window + window * u.min(1.0);
                    }
                }
                *failure_weight
            }
        }
    }
}

fn sample_standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, method: &TruncMethod, rng: &mut R) -> f64 {
    match *method {
        TruncMethod::Rejection => loop {
            let z: f64 = rng.sample(StandardNormal);
            if z >= a && z <= b {
                break z;
            }
        },
        TruncMethod::Inverse { lo_tail, hi_tail, flip, upper } => {
            let u = lo_tail + (hi_tail - lo_tail) * rng.random::<f64>();
            let x = if upper {
                // survival(x) = u  <=>  x = sqrt(2) * erfc_inv(2u)
                SQRT_2 * erfc_inv(2.0 * u)
            } else {
                -SQRT_2 * erfc_inv(2.0 * u)
            };
            let x = if flip { -x } else { x };
            x.clamp(a, b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn empirical(spec: &WeightSpec, n: usize, seed: u64) -> (f64, f64) {
        let s = Sampler::new(spec);
        let mut rng = stream(seed, &[]);
        let xs: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (mean, var)
    }

    #[test]
    fn normal_mass_matches_known_values() {
        let m = normal_mass(0.0, 1.0, -1.0, 1.0);
        assert!((m - 0.682_689_492_137_085_9).abs() < 1e-12, "{m:e}");
        assert!((normal_mass(0.0, 1.0, 0.0, f64::INFINITY) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn far_tail_truncation_uses_inverse_cdf() {
        // Interval [6, 7] of a standard normal: mass ~1e-9, rejection would never finish.
        let spec = WeightSpec::TruncatedNormal { loc: 0.0, scale: 1.0, low: 6.0, high: 7.0 };
        let s = Sampler::new(&spec);
        let mut rng = stream(3, &[]);
        let xs: Vec<f64> = (0..20_000).map(|_| s.sample(&mut rng)).collect();
        assert!(xs.iter().all(|&x| (6.0..=7.0).contains(&x)));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let (m, v) = analytic_moments(&spec);
        assert!((mean - m).abs() < 4.0 * (v / xs.len() as f64).sqrt(), "mean {mean} vs {m}");
    }

    #[test]
    fn narrow_central_truncation() {
        let spec = WeightSpec::TruncatedNormal { loc: 5.0, scale: 1.0, low: 4.9, high: 5.2 };
        let (m, v) = analytic_moments(&spec);
        let (em, _) = empirical(&spec, 50_000, 11);
        assert!((em - m).abs() < 4.0 * (v / 50_000.0).sqrt());
    }

    #[test]
    fn lower_tail_truncation_flips() {
        let spec = WeightSpec::TruncatedNormal { loc: 10.0, scale: 1.0, low: 4.0, high: 5.0 };
        let (m, v) = analytic_moments(&spec);
        let (em, _) = empirical(&spec, 50_000, 12);
        assert!((4.0..=5.0).contains(&em));
        assert!((em - m).abs() < 4.0 * (v / 50_000.0).sqrt(), "{em} vs {m}");
    }

    #[test]
    fn app_moments_match_simulation() {
        let spec = WeightSpec::AppRetransmission {
            success_prob: 0.7,
            window: 10.0,
            max_attempts: 4,
            base_alpha: 0.5,
            base_beta: 3.0,
            failure_weight: 100.0,
        };
        let (m, v) = analytic_moments(&spec);
        let (em, ev) = empirical(&spec, 200_000, 5);
        assert!((em - m).abs() < 4.0 * (v / 200_000.0).sqrt(), "{em} vs {m}");
        assert!((ev / v - 1.0).abs() < 0.05);
    }
}
