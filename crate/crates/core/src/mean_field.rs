//! The continuous (mean-field) transport energy of a density on `[0,1]`.
//!
//! For `μ = φ dx` with CDF `Φ`, the energy is `E(μ) = ∫ |x − Φ(x)| φ(x) dx`,
//! and adding an infinitesimal mass at `x` changes it at the rate
//!
//! ```text
//! D(x) = ∫_0^x s Φ φ dt + ∫_x^1 s (Φ − 1) φ dt + |x − Φ(x)|,   s = sign(Φ(t) − t).
//! ```
//!
//! This module locates the fixed points `Φ(x) = x`, evaluates `D`, checks
//! that its minimum sits at a fixed point together with the quantitative
//! bounds on that minimum, and evaluates the step-function inequalities
//! behind those bounds, exactly when the breakpoints are rational.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Num, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, bisect, golden_section_min, integrate_split};
use crate::targets::TargetDistribution;

/// Resolution of the fixed-point and step-function grid scans.
pub const SCAN_GRID: usize = 10_000;
/// Absolute quadrature tolerance.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;
/// Slack for the quantitative bounds on the minimum of `D`.
pub const BOUND_TOLERANCE: f64 = 1e-8;
/// Agreement required between restricted and unrestricted minima.
pub const CHAIN_TOLERANCE: f64 = 1e-6;

/// `|Φ(x) − x|` at or below this on a grid node counts as an exact zero.
const NODE_ZERO: f64 = 1e-12;
/// A local minimum of `|Φ(x) − x|` below this is a tangential fixed point.
const TANGENT_ZERO: f64 = 1e-11;
const ROOT_XTOL: f64 = 1e-13;

/// A probability density on `[0,1]` with its CDF.
pub trait Density {
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;

    fn inv_cdf(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        bisect(&|x| self.cdf(x) - p, 0.0, 1.0, 1e-15)
    }

    /// Abscissae where the density is not smooth.
    fn knots(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Density for TargetDistribution {
    fn pdf(&self, x: f64) -> f64 {
        TargetDistribution::pdf(self, x)
    }

    fn cdf(&self, x: f64) -> f64 {
        TargetDistribution::cdf(self, x)
    }

    fn inv_cdf(&self, p: f64) -> f64 {
        TargetDistribution::inv_cdf(self, p)
    }

    fn knots(&self) -> Vec<f64> {
        TargetDistribution::knots(self)
    }
}

type RealFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A density given by closures, for measures outside the built-in families.
pub struct CustomDensity {
    pdf: RealFn,
    cdf: RealFn,
    knots: Vec<f64>,
}

impl CustomDensity {
    pub fn new(
        pdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            pdf: Box::new(pdf),
            cdf: Box::new(cdf),
            knots: Vec::new(),
        }
    }

    pub fn with_knots(mut self, knots: Vec<f64>) -> Self {
        self.knots = knots;
        self
    }

    /// `φ(x) = 1 + ε sin(2πx)`, a smooth perturbation of the uniform density.
    pub fn sine_perturbation(eps: f64) -> Self {
        use std::f64::consts::TAU;
        Self::new(
            move |x| 1.0 + eps * (TAU * x).sin(),
            move |x| x + eps * (1.0 - (TAU * x).cos()) / TAU,
        )
    }
}

impl Density for CustomDensity {
    fn pdf(&self, x: f64) -> f64 {
        (self.pdf)(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    fn knots(&self) -> Vec<f64> {
        self.knots.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    pub x: f64,
    /// `Φ − x` touches zero here without changing sign.
    pub tangent: bool,
}

/// A maximal interval between consecutive cuts, with the sign of `Φ − x`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    a: f64,
    b: f64,
    sign: f64,
}

/// A validated density on `[0,1]` with its fixed points and the per-piece
/// integrals behind `D`.
pub struct MeanFieldMeasure {
    density: Box<dyn Density + Send + Sync>,
    bounds: (f64, f64),
    fixed_points: Vec<FixedPoint>,
    coincidences: Vec<(f64, f64)>,
    pieces: Vec<Piece>,
    /// `Σ_{i<j} s_i ∫ Φφ` over the pieces before `j`.
    left_acc: Vec<f64>,
    /// `Σ_{i>j} s_i ∫ (Φ − 1)φ` over the pieces after `j`.
    right_acc: Vec<f64>,
}

impl fmt::Debug for MeanFieldMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeanFieldMeasure")
            .field("bounds", &self.bounds)
            .field("fixed_points", &self.fixed_points)
            .field("coincidences", &self.coincidences)
            .finish_non_exhaustive()
    }
}

impl MeanFieldMeasure {
    pub fn new(density: impl Density + Send + Sync + 'static) -> Result<Self> {
        let density: Box<dyn Density + Send + Sync> = Box::new(density);
        let (f0, f1) = (density.cdf(0.0), density.cdf(1.0));
        if f0.abs() > 1e-12 || (f1 - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "measure must live on [0,1]: got CDF(0) = {f0}, CDF(1) = {f1}"
            )));
        }
        let bounds = density_bounds(density.as_ref())?;
        let (fixed_points, coincidences) = find_fixed_points(density.as_ref());

        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        cuts.extend(fixed_points.iter().map(|p| p.x));
        cuts.extend(coincidences.iter().flat_map(|&(a, b)| [a, b]));
        cuts.extend(density.knots().into_iter().filter(|k| (0.0..=1.0).contains(k)));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let pieces: Vec<Piece> = cuts
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let m = 0.5 * (a + b);
                let inside = coincidences.iter().any(|&(lo, hi)| lo <= a && b <= hi);
                let g = density.cdf(m) - m;
                let sign = if inside || g == 0.0 { 0.0 } else { g.signum() };
                Piece { a, b, sign }
            })
            .collect();

        let mut measure = Self {
            density,
            bounds,
            fixed_points,
            coincidences,
            pieces,
            left_acc: Vec::new(),
            right_acc: Vec::new(),
        };
        let k = measure.pieces.len();
        let mut left = vec![0.0; k];
        let mut right = vec![0.0; k];
        for j in 1..k {
            let p = measure.pieces[j - 1];
            left[j] = left[j - 1] + p.sign * measure.lower_integral(p.a, p.b)?;
        }
        for j in (0..k.saturating_sub(1)).rev() {
            let p = measure.pieces[j + 1];
            right[j] = right[j + 1] + p.sign * measure.upper_integral(p.a, p.b)?;
        }
        measure.left_acc = left;
        measure.right_acc = right;
        Ok(measure)
    }

    /// Builds a measure from a distribution supported on `[0,1]`.
    pub fn from_distribution(dist: &TargetDistribution) -> Result<Self> {
        if dist.support() != (0.0, 1.0) {
            let (a, b) = dist.support();
            return Err(Error::Config(format!(
                "mean-field analysis needs support [0,1], got [{a}, {b}]"
            )));
        }
        Self::new(dist.clone())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.density.pdf(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.density.cdf(x)
    }

    pub fn inv_cdf(&self, p: f64) -> f64 {
        self.density.inv_cdf(p)
    }

    /// Smallest and largest sampled density values.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// Sorted fixed points of `Φ`, always including 0 and 1. Ends of
    /// coincidence intervals are listed as fixed points too.
    pub fn fixed_points(&self) -> &[FixedPoint] {
        &self.fixed_points
    }

    /// Subintervals on which `Φ(x) = x` identically.
    pub fn coincidences(&self) -> &[(f64, f64)] {
        &self.coincidences
    }

    /// Whether `Φ(x) = x` has finitely many solutions.
    pub fn has_finite_fixed_points(&self) -> bool {
        self.coincidences.is_empty()
    }

    fn require_finite_fixed_points(&self) -> Result<()> {
        match self.coincidences.first() {
            None => Ok(()),
            Some(&(a, b)) => Err(Error::Precondition(format!(
                "Φ(x) = x on all of [{a}, {b}], so the fixed points are not isolated"
            ))),
        }
    }

    fn breaks(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.a).skip(1).collect()
    }

    fn tolerance_share(&self, a: f64, b: f64) -> f64 {
        (QUADRATURE_TOLERANCE * (b - a)).max(1e-16)
    }

    /// `∫_a^b Φ φ`.
    fn lower_integral(&self, a: f64, b: f64) -> Result<f64> {
        let f = |t: f64| {
            let c = self.cdf(t);
            if c == 0.0 {
                0.0
            } else {
                c * self.pdf(t)
            }
        };
        adaptive_simpson(&f, a, b, self.tolerance_share(a, b))
    }

    /// `∫_a^b (Φ − 1) φ`.
    fn upper_integral(&self, a: f64, b: f64) -> Result<f64> {
        let f = |t: f64| {
            let c = self.cdf(t) - 1.0;
            if c == 0.0 {
                0.0
            } else {
                c * self.pdf(t)
            }
        };
        adaptive_simpson(&f, a, b, self.tolerance_share(a, b))
    }

    fn piece_index(&self, x: f64) -> usize {
        self.pieces
            .partition_point(|p| p.a <= x)
            .saturating_sub(1)
            .min(self.pieces.len() - 1)
    }
}

fn density_bounds(d: &dyn Density) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let probes = (0..=SCAN_GRID)
        .map(|i| i as f64 / SCAN_GRID as f64)
        .chain((0..SCAN_GRID).map(|i| (i as f64 + 0.5) / SCAN_GRID as f64));
    for x in probes {
        let v = d.pdf(x);
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Config(format!(
                "density must be finite and non-negative on [0,1], got φ({x}) = {v}"
            )));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo <= 0.0 {
        log::warn!("density touches zero on [0,1]; bounds are ({lo}, {hi})");
    }
    Ok((lo, hi))
}

fn find_fixed_points(d: &dyn Density) -> (Vec<FixedPoint>, Vec<(f64, f64)>) {
    let nodes: Vec<f64> = (0..=SCAN_GRID).map(|i| i as f64 / SCAN_GRID as f64).collect();
    let g: Vec<f64> = nodes.iter().map(|&x| d.cdf(x) - x).collect();
    let diff = |x: f64| d.cdf(x) - x;
    let zero = |v: f64| v.abs() <= NODE_ZERO;
    let last = SCAN_GRID;

    let mut fixed = Vec::new();
    let mut coincident = Vec::new();
    let mut i = 0;
    while i <= last {
        if zero(g[i]) {
            let start = i;
            while i < last && zero(g[i + 1]) {
                i += 1;
            }
            if i > start {
                coincident.push((nodes[start], nodes[i]));
                fixed.push(FixedPoint {
                    x: nodes[start],
                    tangent: false,
                });
                fixed.push(FixedPoint {
                    x: nodes[i],
                    tangent: false,
                });
            } else {
                let tangent = start > 0 && start < last && g[start - 1].signum() == g[start + 1].signum();
                fixed.push(FixedPoint {
                    x: nodes[start],
                    tangent,
                });
            }
            i += 1;
            continue;
        }
        if i < last && !zero(g[i + 1]) && (g[i] > 0.0) != (g[i + 1] > 0.0) {
            fixed.push(FixedPoint {
                x: bisect(&diff, nodes[i], nodes[i + 1], ROOT_XTOL),
                tangent: false,
            });
        }
        if i > 0 && i < last {
            let (l, m, r) = (g[i - 1], g[i], g[i + 1]);
            let same_sign = !zero(l) && !zero(r) && l.signum() == m.signum() && m.signum() == r.signum();
            if same_sign && m.abs() <= l.abs() && m.abs() <= r.abs() {
                let (x, v) = golden_section_min(&|x| diff(x).abs(), nodes[i - 1], nodes[i + 1], ROOT_XTOL);
                if v < TANGENT_ZERO {
                    fixed.push(FixedPoint { x, tangent: true });
                }
            }
        }
        i += 1;
    }
    for end in [0.0, 1.0] {
        if !fixed.iter().any(|p| p.x == end) {
            fixed.push(FixedPoint { x: end, tangent: false });
        }
    }
    fixed.sort_by(|a, b| a.x.total_cmp(&b.x));
    fixed.dedup_by(|b, a| (b.x - a.x).abs() <= 1e-12);
    for p in fixed.iter_mut().filter(|p| p.x == 0.0 || p.x == 1.0) {
        p.tangent = false;
    }
    (fixed, coincident)
}

/// `E(μ) = ∫ |x − Φ(x)| φ(x) dx`, split at fixed points and knots.
pub fn continuous_energy(m: &MeanFieldMeasure) -> Result<f64> {
    let f = |x: f64| {
        let d = (x - m.cdf(x)).abs();
        if d == 0.0 {
            0.0
        } else {
            d * m.pdf(x)
        }
    };
    integrate_split(&f, 0.0, 1.0, &m.breaks(), QUADRATURE_TOLERANCE)
}

/// The same energy written as `∫ |Φ⁻¹(z) − z| dz`.
pub fn continuous_energy_inverse_form(m: &MeanFieldMeasure) -> Result<f64> {
    let f = |z: f64| (m.inv_cdf(z) - z).abs();
    let breaks: Vec<f64> = m.breaks().into_iter().map(|x| m.cdf(x)).collect();
    integrate_split(&f, 0.0, 1.0, &breaks, QUADRATURE_TOLERANCE)
}

/// `D(x)`, the first-order energy change when mass is added at `x`.
pub fn energy_derivative_at(m: &MeanFieldMeasure, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::arg(format!("abscissa {x} is outside [0,1]")));
    }
    let j = m.piece_index(x);
    let p = m.pieces[j];
    let mut value = m.left_acc[j] + m.right_acc[j] + (x - m.cdf(x)).abs();
    if p.sign != 0.0 {
        value += p.sign * (m.lower_integral(p.a, x)? + m.upper_integral(x, p.b)?);
    }
    Ok(value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeMinimum {
    /// Fixed point attaining the minimum (smallest on ties).
    pub x: f64,
    pub value: f64,
    /// Best value found on the uniform scan grid, and where.
    pub grid_x: f64,
    pub grid_value: f64,
}

/// Minimises `D` over the fixed points and confirms on a uniform grid that
/// no other abscissa does better.
pub fn minimize_derivative(m: &MeanFieldMeasure) -> Result<DerivativeMinimum> {
    m.require_finite_fixed_points()?;
    let mut best = (f64::INFINITY, 0.0);
    for p in m.fixed_points() {
        let v = energy_derivative_at(m, p.x)?;
        if v < best.0 {
            best = (v, p.x);
        }
    }
    let mut grid = (f64::INFINITY, 0.0);
    for i in 0..=SCAN_GRID {
        let x = i as f64 / SCAN_GRID as f64;
        let v = energy_derivative_at(m, x)?;
        if v < grid.0 {
            grid = (v, x);
        }
    }
    if grid.0 < best.0 - 10.0 * QUADRATURE_TOLERANCE {
        return Err(Error::Invariant(format!(
            "D({}) = {} beats the best fixed-point value D({}) = {}",
            grid.1, grid.0, best.1, best.0
        )));
    }
    Ok(DerivativeMinimum {
        x: best.1,
        value: best.0,
        grid_x: grid.1,
        grid_value: grid.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinimumBoundsReport {
    pub min_value: f64,
    pub argmin: f64,
    /// Longest interval on which `Φ − x` keeps a strict sign.
    pub longest_gap: f64,
    /// `−|J|² / 4`.
    pub longest_gap_bound: f64,
    /// Number of solutions of `Φ(x) = x`.
    pub fixed_point_count: usize,
    /// `−1 / (4S)` with `S` the number of fixed points.
    pub sparse_fixed_point_bound: f64,
    pub all_satisfied: bool,
}

/// Checks `min D < 0`, `min D <= −|J|²/4` and `min D <= −1/(4S)`.
pub fn minimum_bounds_check(m: &MeanFieldMeasure) -> Result<MinimumBoundsReport> {
    let min = minimize_derivative(m)?;
    let fps = m.fixed_points();
    let longest_gap = fps.windows(2).map(|w| w[1].x - w[0].x).fold(0.0, f64::max);
    let longest_gap_bound = -longest_gap * longest_gap / 4.0;
    let s = fps.len();
    let sparse_fixed_point_bound = -1.0 / (4.0 * s as f64);
    let all_satisfied = min.value < 0.0
        && min.value <= longest_gap_bound + BOUND_TOLERANCE
        && min.value <= sparse_fixed_point_bound + BOUND_TOLERANCE;
    Ok(MinimumBoundsReport {
        min_value: min.value,
        argmin: min.x,
        longest_gap,
        longest_gap_bound,
        fixed_point_count: s,
        sparse_fixed_point_bound,
        all_satisfied,
    })
}

/// Minima of `g(α) = ∫_0^α σ z dz + ∫_α^1 σ (z − 1) dz`,
/// `σ(z) = sign(z − Φ⁻¹(z))`, over the fixed points and over all of `[0,1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainMinima {
    pub restricted: f64,
    pub unrestricted: f64,
}

/// Computes both minima of the reduced functional.
///
/// The restricted minimum reuses the measure's fixed points and piece signs
/// (`σ` is constant on the image of each piece). The unrestricted one is
/// independent of them: `σ` is sampled through `Φ⁻¹` on a uniform grid, sign
/// changes inside a cell are located by bisection, and since `g' = σ` the
/// minimum lies at a grid node or one of those roots.
pub fn chain_minima(m: &MeanFieldMeasure) -> Result<ChainMinima> {
    m.require_finite_fixed_points()?;

    // Restricted: g at each fixed point from the piece signs in z-space.
    let zs: Vec<(f64, f64, f64)> = m.pieces.iter().map(|p| (m.cdf(p.a), m.cdf(p.b), p.sign)).collect();
    let moment: f64 = zs.iter().map(|&(a, b, s)| s * (b * b - a * a) / 2.0).sum();
    let g_at = |alpha: f64| {
        let tail: f64 = zs
            .iter()
            .map(|&(a, b, s)| s * (b.min(1.0) - a.max(alpha)).max(0.0))
            .sum();
        moment - tail
    };
    let restricted = m
        .fixed_points()
        .iter()
        .map(|p| g_at(p.x))
        .fold(f64::INFINITY, f64::min);

    // Unrestricted: per-cell integrals of σ and σz from the quantile function.
    let w = |z: f64| z - m.inv_cdf(z);
    let nodes: Vec<f64> = (0..=SCAN_GRID).map(|i| i as f64 / SCAN_GRID as f64).collect();
    let wv: Vec<f64> = nodes.iter().map(|&z| w(z)).collect();
    // Each cell becomes one or two sub-intervals of constant sign.
    let mut parts: Vec<(f64, f64, f64)> = Vec::with_capacity(SCAN_GRID + 16);
    for i in 0..SCAN_GRID {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let (wa, wb) = (wv[i], wv[i + 1]);
        if wa != 0.0 && wb != 0.0 && (wa > 0.0) != (wb > 0.0) {
            let r = bisect(&w, a, b, ROOT_XTOL);
            parts.push((a, r, wa.signum()));
            parts.push((r, b, wb.signum()));
        } else {
            let mid = w(0.5 * (a + b));
            let s = if mid == 0.0 { 0.0 } else { mid.signum() };
            parts.push((a, b, s));
        }
    }
    let total_moment: f64 = parts.iter().map(|&(a, b, s)| s * (b * b - a * a) / 2.0).sum();
    let mut tail = 0.0;
    let mut unrestricted = total_moment; // α = 1
    for &(a, b, s) in parts.iter().rev() {
        tail += s * (b - a);
        unrestricted = unrestricted.min(total_moment - tail);
    }
    Ok(ChainMinima {
        restricted,
        unrestricted,
    })
}

/// Whether the restricted and unrestricted minima agree within 1e-6.
pub fn simplification_chain_check(m: &MeanFieldMeasure) -> Result<bool> {
    let c = chain_minima(m)?;
    Ok((c.restricted - c.unrestricted).abs() <= CHAIN_TOLERANCE)
}

/// Everything the mean-field analysis reports for one measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanFieldReport {
    pub energy: f64,
    pub min_derivative: f64,
    pub argmin: f64,
    pub fixed_points: Vec<FixedPoint>,
    pub bounds: MinimumBoundsReport,
    pub checks: MeanFieldChecks,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanFieldChecks {
    pub grid_never_beats_fixed_points: bool,
    pub chain_minima_agree: bool,
    pub energy_forms_agree: bool,
}

pub fn analyze(m: &MeanFieldMeasure) -> Result<MeanFieldReport> {
    let energy = continuous_energy(m)?;
    let energy_forms_agree = (continuous_energy_inverse_form(m)? - energy).abs() <= 1e-8;
    let bounds = minimum_bounds_check(m)?;
    Ok(MeanFieldReport {
        energy,
        min_derivative: bounds.min_value,
        argmin: bounds.argmin,
        fixed_points: m.fixed_points().to_vec(),
        bounds,
        checks: MeanFieldChecks {
            grid_never_beats_fixed_points: true,
            chain_minima_agree: simplification_chain_check(m)?,
            energy_forms_agree,
        },
    })
}

/// Scalars for [`step_sign_analysis`]: exact rationals or floats with slack.
pub trait StepScalar: Clone + PartialOrd + Num + Signed {
    /// Allowed violation when comparing both sides of an inequality.
    fn slack() -> Self;
}

impl StepScalar for f64 {
    fn slack() -> Self {
        1e-12
    }
}

impl StepScalar for BigRational {
    fn slack() -> Self {
        BigRational::zero()
    }
}

/// A `±1`-valued function on `[0,1]` with finitely many sign changes.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSignFunction<T> {
    breakpoints: Vec<T>,
    signs: Vec<i8>,
}

impl<T: StepScalar> StepSignFunction<T> {
    /// `breakpoints` run `0 = b_0 < … < b_S = 1`; `signs[k]` applies on
    /// `[b_k, b_{k+1}]` and adjacent signs differ.
    pub fn new(breakpoints: Vec<T>, signs: Vec<i8>) -> Result<Self> {
        if breakpoints.len() < 2 || signs.len() + 1 != breakpoints.len() {
            return Err(Error::arg("need S + 1 breakpoints for S signs, S >= 1"));
        }
        if breakpoints[0] != T::zero() || breakpoints[breakpoints.len() - 1] != T::one() {
            return Err(Error::arg("breakpoints must start at 0 and end at 1"));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::arg("breakpoints must be strictly increasing"));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) || signs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("signs must be ±1 and alternate"));
        }
        Ok(Self { breakpoints, signs })
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Number of intervals of constancy.
    pub fn interval_count(&self) -> usize {
        self.signs.len()
    }

    pub fn lengths(&self) -> Vec<T> {
        self.breakpoints.windows(2).map(|w| w[1].clone() - w[0].clone()).collect()
    }

    fn signed(&self, k: usize, v: T) -> T {
        if self.signs[k] > 0 {
            v
        } else {
            -v
        }
    }

    /// `G(b_k)` for every breakpoint, with `G(z) = ∫_0^z g`.
    fn antiderivative_nodes(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.breakpoints.len());
        out.push(T::zero());
        for (k, l) in self.lengths().into_iter().enumerate() {
            let next = out[k].clone() + self.signed(k, l);
            out.push(next);
        }
        out
    }

    /// `∫_0^1 G`, exact since `G` is piecewise linear.
    fn antiderivative_mean(&self) -> T {
        let g = self.antiderivative_nodes();
        let two = T::one() + T::one();
        self.lengths()
            .into_iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, l)| acc + (g[k].clone() + g[k + 1].clone()) * l / two.clone())
    }

    /// `h(α) = G(α) − ∫_0^1 G`.
    pub fn h(&self, alpha: T) -> T {
        let g = self.antiderivative_nodes();
        let k = self
            .breakpoints
            .iter()
            .rposition(|b| *b <= alpha)
            .unwrap_or(0)
            .min(self.signs.len() - 1);
        let offset = alpha - self.breakpoints[k].clone();
        g[k].clone() + self.signed(k, offset) - self.antiderivative_mean()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepSignReport<T> {
    /// `X = −min h`.
    pub x: T,
    pub h_min_arg: T,
    /// `∫_0^1 h`, zero by construction.
    pub h_mean: T,
    /// `X >= max ℓ_k² / 4`.
    pub longest_interval: bool,
    /// `Σ_{ℓ_k > X} (ℓ_k − X)² <= 2X`.
    pub sum_bound: bool,
    /// `X >= 1/(4S)` with `S` the number of intervals.
    pub sign_change_bound: bool,
}

impl<T> StepSignReport<T> {
    pub fn all_hold(&self) -> bool {
        self.longest_interval && self.sum_bound && self.sign_change_bound
    }
}

/// Evaluates the three step-function inequalities for `g`.
///
/// `h` is piecewise linear, so its minimum sits at a breakpoint.
pub fn step_sign_analysis<T: StepScalar>(g: &StepSignFunction<T>) -> StepSignReport<T> {
    let nodes = g.antiderivative_nodes();
    let mean = g.antiderivative_mean();
    let two = T::one() + T::one();
    let four = two.clone() + two.clone();

    let mut min_h = nodes[0].clone() - mean.clone();
    let mut arg = g.breakpoints[0].clone();
    for (b, gv) in g.breakpoints.iter().zip(&nodes).skip(1) {
        let h = gv.clone() - mean.clone();
        if h < min_h {
            min_h = h;
            arg = b.clone();
        }
    }
    let x = -min_h;

    let h_values: Vec<T> = nodes.iter().map(|v| v.clone() - mean.clone()).collect();
    let lengths = g.lengths();
    let h_mean = lengths.iter().enumerate().fold(T::zero(), |acc, (k, l)| {
        acc + (h_values[k].clone() + h_values[k + 1].clone()) * l.clone() / two.clone()
    });

    let slack = T::slack();
    let longest = lengths.iter().fold(T::zero(), |m, l| if *l > m { l.clone() } else { m });
    let longest_interval = x.clone() + slack.clone() >= longest.clone() * longest / four.clone();
    let excess = lengths
        .iter()
        .filter(|l| **l > x)
        .fold(T::zero(), |acc, l| acc + (l.clone() - x.clone()) * (l.clone() - x.clone()));
    let sum_bound = excess <= two * x.clone() + slack.clone();
    let s = (0..g.interval_count()).fold(T::zero(), |acc, _| acc + T::one());
    let sign_change_bound = (x.clone() + slack) * four * s >= T::one();

    StepSignReport {
        x,
        h_min_arg: arg,
        h_mean,
        longest_interval,
        sum_bound,
        sign_change_bound,
    }
}
