//! Target distributions on the real line and the CDF round trip that reduces
//! sampling from any of them to the uniform problem on `[0,1]`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::{extend, EnergyTrace};
use crate::point_set::{GridKind, SortedPointSet, UnitPoint};

/// Quantile levels used in place of 0 and 1 when inverting an unbounded CDF.
pub const OPEN_END_CLAMP: f64 = 1e-15;

/// JSON-facing description of a target distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, std: f64 },
    TruncatedGaussian { mean: f64, std: f64, a: f64, b: f64 },
    /// Knots `(x, F(x))`, `x` strictly increasing, `F` non-decreasing from 0 to 1.
    PiecewiseLinearCdf { knots: Vec<[f64; 2]> },
    /// `F(x) = x^theta` on `[0,1]`.
    Power { theta: f64 },
}

/// A validated probability measure with density, CDF and quantile function.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetDistribution {
    spec: DistributionSpec,
    /// Truncated Gaussian only: standardised bounds, whether the upper tail is
    /// used for accuracy, and the tail mass at each bound.
    truncation: Option<Truncation>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Truncation {
    lo: f64,
    hi: f64,
    reflected: bool,
    tail_lo: f64,
    tail_hi: f64,
}

/// Validates a spec and builds the distribution.
pub fn make_distribution(spec: &DistributionSpec) -> Result<TargetDistribution> {
    let bad = |msg: String| Err(Error::Config(msg));
    let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
    let mut truncation = None;
    match spec {
        DistributionSpec::Uniform { a, b } => {
            if !finite(&[*a, *b]) || a >= b {
                return bad(format!("uniform needs finite a < b, got [{a}, {b}]"));
            }
        }
        DistributionSpec::Gaussian { mean, std } => {
            if !finite(&[*mean, *std]) || *std <= 0.0 {
                return bad(format!("gaussian needs finite mean and std > 0, got std = {std}"));
            }
        }
        DistributionSpec::TruncatedGaussian { mean, std, a, b } => {
            if !finite(&[*mean, *std]) || *std <= 0.0 {
                return bad(format!("truncated gaussian needs std > 0, got {std}"));
            }
            if a.is_nan() || b.is_nan() || a >= b {
                return bad(format!("truncated gaussian needs a < b, got [{a}, {b}]"));
            }
            let lo = (a - mean) / std;
            let hi = (b - mean) / std;
            // Work in whichever tail keeps the masses away from 1.
            let reflected = lo > 0.0;
            let (tail_lo, tail_hi) = if reflected {
                (upper_tail(lo), upper_tail(hi))
            } else {
                (std_normal_cdf(lo), std_normal_cdf(hi))
            };
            if (tail_hi - tail_lo).abs() <= 0.0 {
                return bad("truncation interval carries no probability mass".into());
            }
            truncation = Some(Truncation {
                lo,
                hi,
                reflected,
                tail_lo,
                tail_hi,
            });
        }
        DistributionSpec::PiecewiseLinearCdf { knots } => {
            if knots.len() < 2 {
                return bad("piecewise linear CDF needs at least two knots".into());
            }
            if knots.iter().any(|k| !finite(k)) {
                return bad("piecewise linear CDF knots must be finite".into());
            }
            if knots.windows(2).any(|w| w[1][0] <= w[0][0] || w[1][1] < w[0][1]) {
                return bad("piecewise linear CDF knots must have increasing x and non-decreasing F".into());
            }
            if knots[0][1] != 0.0 || knots[knots.len() - 1][1] != 1.0 {
                return bad("piecewise linear CDF must run from F = 0 to F = 1".into());
            }
        }
        DistributionSpec::Power { theta } => {
            if !theta.is_finite() || *theta <= 0.0 {
                return bad(format!("power distribution needs theta > 0, got {theta}"));
            }
        }
    }
    Ok(TargetDistribution {
        spec: spec.clone(),
        truncation,
    })
}

impl TargetDistribution {
    pub fn from_spec(spec: DistributionSpec) -> Result<Self> {
        make_distribution(&spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn uniform01() -> Self {
        Self::from_spec(DistributionSpec::Uniform { a: 0.0, b: 1.0 }).expect("valid")
    }

    pub fn standard_gaussian() -> Self {
        Self::from_spec(DistributionSpec::Gaussian { mean: 0.0, std: 1.0 }).expect("valid")
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    /// Support interval; infinite ends are `±inf`.
    pub fn support(&self) -> (f64, f64) {
        match &self.spec {
            DistributionSpec::Uniform { a, b } | DistributionSpec::TruncatedGaussian { a, b, .. } => (*a, *b),
            DistributionSpec::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            DistributionSpec::PiecewiseLinearCdf { knots } => (knots[0][0], knots[knots.len() - 1][0]),
            DistributionSpec::Power { .. } => (0.0, 1.0),
        }
    }

    /// Finite interval carrying all but a `1e-6` tail on each unbounded side.
    pub fn interior_range(&self) -> (f64, f64) {
        let (a, b) = self.support();
        let a = if a.is_finite() { a } else { self.inv_cdf(1e-6) };
        let b = if b.is_finite() { b } else { self.inv_cdf(1.0 - 1e-6) };
        (a, b)
    }

    /// Abscissae where the density is not smooth (finite support ends and
    /// piecewise-linear knots).
    pub fn knots(&self) -> Vec<f64> {
        match &self.spec {
            DistributionSpec::PiecewiseLinearCdf { knots } => knots.iter().map(|k| k[0]).collect(),
            _ => {
                let (a, b) = self.support();
                [a, b].into_iter().filter(|v| v.is_finite()).collect()
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x < a || x > b {
            return 0.0;
        }
        match &self.spec {
            DistributionSpec::Uniform { a, b } => 1.0 / (b - a),
            DistributionSpec::Gaussian { mean, std } => std_normal_pdf((x - mean) / std) / std,
            DistributionSpec::TruncatedGaussian { mean, std, .. } => {
                let t = self.truncation.expect("set at construction");
                std_normal_pdf((x - mean) / std) / (std * (t.tail_hi - t.tail_lo).abs())
            }
            DistributionSpec::PiecewiseLinearCdf { knots } => {
                let k = knots.partition_point(|k| k[0] <= x).clamp(1, knots.len() - 1);
                (knots[k][1] - knots[k - 1][1]) / (knots[k][0] - knots[k - 1][0])
            }
            DistributionSpec::Power { theta } => theta * x.powf(theta - 1.0),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        let v = match &self.spec {
            DistributionSpec::Uniform { a, b } => (x - a) / (b - a),
            DistributionSpec::Gaussian { mean, std } => std_normal_cdf((x - mean) / std),
            DistributionSpec::TruncatedGaussian { mean, std, .. } => {
                let t = self.truncation.expect("set at construction");
                let z = (x - mean) / std;
                if t.reflected {
                    (t.tail_lo - upper_tail(z)) / (t.tail_lo - t.tail_hi)
                } else {
                    (std_normal_cdf(z) - t.tail_lo) / (t.tail_hi - t.tail_lo)
                }
            }
            DistributionSpec::PiecewiseLinearCdf { knots } => {
                let k = knots.partition_point(|k| k[0] <= x).clamp(1, knots.len() - 1);
                let (x0, f0) = (knots[k - 1][0], knots[k - 1][1]);
                let (x1, f1) = (knots[k][0], knots[k][1]);
                f0 + (f1 - f0) * (x - x0) / (x1 - x0)
            }
            DistributionSpec::Power { theta } => x.powf(*theta),
        };
        v.clamp(0.0, 1.0)
    }

    /// Quantile function. Unbounded ends are clamped to the
    /// `[1e-15, 1 − 1e-15]` quantiles with a warning.
    pub fn inv_cdf(&self, p: f64) -> f64 {
        if p.is_nan() {
            return f64::NAN;
        }
        let p = p.clamp(0.0, 1.0);
        match &self.spec {
            DistributionSpec::Uniform { a, b } => {
                if p == 1.0 {
                    *b
                } else {
                    a + p * (b - a)
                }
            }
            DistributionSpec::Gaussian { mean, std } => {
                let q = if !(OPEN_END_CLAMP..=1.0 - OPEN_END_CLAMP).contains(&p) {
                    log::warn!("quantile {p} of an unbounded distribution clamped to the 1e-15 tail");
                    p.clamp(OPEN_END_CLAMP, 1.0 - OPEN_END_CLAMP)
                } else {
                    p
                };
                mean + std * std_normal_quantile(q)
            }
            DistributionSpec::TruncatedGaussian { mean, std, a, b } => {
                if p == 0.0 {
                    return *a;
                }
                if p == 1.0 {
                    return *b;
                }
                let t = self.truncation.expect("set at construction");
                let z = if t.reflected {
                    -std_normal_quantile(t.tail_lo - p * (t.tail_lo - t.tail_hi))
                } else {
                    std_normal_quantile(t.tail_lo + p * (t.tail_hi - t.tail_lo))
                };
                (mean + std * z.clamp(t.lo, t.hi)).clamp(*a, *b)
            }
            DistributionSpec::PiecewiseLinearCdf { knots } => {
                let k = knots.partition_point(|k| k[1] < p);
                if k == 0 {
                    return knots[0][0];
                }
                let k = k.min(knots.len() - 1);
                let (x0, f0) = (knots[k - 1][0], knots[k - 1][1]);
                let (x1, f1) = (knots[k][0], knots[k][1]);
                if p >= f1 {
                    x1
                } else {
                    x0 + (x1 - x0) * (p - f0) / (f1 - f0)
                }
            }
            DistributionSpec::Power { theta } => p.powf(1.0 / theta),
        }
    }
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `1 − Φ(z)` without cancellation.
fn upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Standard normal quantile: Acklam's rational initial guess polished by two
/// Halley steps against the erfc-based CDF.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        // 1 − p is exact here, and the lower tail is the accurate side.
        return -std_normal_quantile(1.0 - p);
    }
    let mut x = acklam(p);
    for _ in 0..2 {
        let e = std_normal_cdf(x) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Smallest final set size for which `points_in_region` points no longer
/// over-represent a region of probability `region_mass`.
pub fn imbalance_floor(points_in_region: usize, region_mass: f64) -> Result<usize> {
    if !(region_mass > 0.0 && region_mass <= 1.0) {
        return Err(Error::arg(format!("region mass must lie in (0, 1], got {region_mass}")));
    }
    let ratio = points_in_region as f64 / region_mass;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        Ok(nearest as usize)
    } else {
        Ok(ratio.ceil() as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetargetPlan {
    pub original_points: Vec<f64>,
    /// Sorted CDF images of the original points.
    pub cdf_images: SortedPointSet,
    /// [`imbalance_floor`] for the originals against the mass of their hull;
    /// `None` when the hull carries no mass.
    pub points_needed_estimate: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Retargeted {
    /// Original points (unchanged, input order) followed by the new points.
    pub points: Vec<f64>,
    pub plan: RetargetPlan,
    /// Greedy trace in CDF space.
    pub trace: EnergyTrace,
}

impl Retargeted {
    pub fn new_points(&self) -> &[f64] {
        &self.points[self.plan.original_points.len()..]
    }
}

/// Extends `points` by `add_count` new points so the union tracks `dist`.
///
/// Work happens in CDF space with the end-grid greedy rule; only the new
/// points are mapped back through the quantile function.
pub fn retarget(points: &[f64], dist: &TargetDistribution, add_count: usize) -> Result<Retargeted> {
    let (lo, hi) = dist.support();
    if let Some(&bad) = points.iter().find(|&&x| x.is_nan() || x < lo || x > hi || x.is_infinite()) {
        return Err(Error::arg(format!("point {bad} lies outside the support [{lo}, {hi}]")));
    }
    let images = points
        .iter()
        .map(|&x| UnitPoint::new(dist.cdf(x)))
        .collect::<Result<Vec<_>>>()?;
    let cdf_images = SortedPointSet::from_points(images);
    let points_needed_estimate = match (cdf_images.values().first(), cdf_images.values().last()) {
        (Some(&a), Some(&b)) => imbalance_floor(points.len(), b - a).ok(),
        _ => None,
    };
    let plan = RetargetPlan {
        original_points: points.to_vec(),
        cdf_images,
        points_needed_estimate,
    };
    let mut out = points.to_vec();
    let trace = if add_count == 0 {
        EnergyTrace::new(points.len())
    } else {
        let (_, trace) = extend(&plan.cdf_images, add_count, GridKind::End)?;
        out.extend(trace.entries.iter().map(|e| dist.inv_cdf(e.chosen.value())));
        trace
    };
    Ok(Retargeted {
        points: out,
        plan,
        trace,
    })
}
