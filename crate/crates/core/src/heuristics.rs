//! The discrepancy function `Δ(x) = #{x_i <= x}/n − x` and a first-order
//! predictor of where the next greedy point lands.
//!
//! The predictor maximises `∫_0^1 sign[Δ(y)] h_x(y) dy` over `x`, with the
//! sawtooth `h_x(y) = y − 1{y > x}`. Splitting off the `x`-independent part
//! leaves `R(x) = ∫_0^x sign[Δ(y)] dy`, so the prediction is the maximiser of
//! the running integral of `sign Δ`. It is diagnostic only and never feeds
//! back into generation.

use crate::error::{Error, Result};
use crate::point_set::{SortedPointSet, UnitPoint};

/// Slack under which two running-integral peaks count as equal.
const PEAK_TIE_TOLERANCE: f64 = 1e-12;

/// A jump of `Δ`: its abscissa and the one-sided limits there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Breakpoint {
    pub x: f64,
    pub left: f64,
    pub right: f64,
}

/// Piecewise-linear `Δ` of a non-empty point set.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyFunction {
    ps: SortedPointSet,
    breakpoints: Vec<Breakpoint>,
}

impl DiscrepancyFunction {
    pub fn new(ps: &SortedPointSet) -> Result<Self> {
        if ps.is_empty() {
            return Err(Error::arg("the discrepancy function needs a non-empty point set"));
        }
        let n = ps.len() as f64;
        let xs = ps.values();
        let mut breakpoints = Vec::new();
        let mut i = 0;
        while i < xs.len() {
            let x = xs[i];
            let below = i;
            while i < xs.len() && xs[i] == x {
                i += 1;
            }
            breakpoints.push(Breakpoint {
                x,
                left: below as f64 / n - x,
                right: i as f64 / n - x,
            });
        }
        Ok(Self {
            ps: ps.clone(),
            breakpoints,
        })
    }

    /// Jumps in increasing order, one per distinct point (multiplicity summed).
    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// `Δ(x)`, counting points equal to `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.ps.count_le(x) as f64 / self.ps.len() as f64 - x
    }

    /// Maximal intervals `[lo, hi)` of constant count, with that count.
    fn pieces(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        let at_zero = self.ps.count_le(0.0);
        let starts = std::iter::once((0.0, at_zero)).chain(
            self.breakpoints
                .iter()
                .filter(|b| b.x > 0.0)
                .map(move |b| (b.x, self.ps.count_le(b.x))),
        );
        let ends = self
            .breakpoints
            .iter()
            .map(|b| b.x)
            .filter(|&x| x > 0.0)
            .chain(std::iter::once(1.0));
        starts.zip(ends).filter(|((lo, _), hi)| hi > lo).map(|((lo, c), hi)| (lo, hi, c))
    }
}

/// The sawtooth `h_x(y) = y` for `y <= x`, `y − 1` for `y > x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sawtooth {
    pub x: f64,
}

impl Sawtooth {
    pub fn eval(&self, y: f64) -> f64 {
        if y <= self.x {
            y
        } else {
            y - 1.0
        }
    }
}

/// `Δ(x)` for `x ∈ [0,1]`.
pub fn delta_at(ps: &SortedPointSet, x: f64) -> Result<f64> {
    if ps.is_empty() {
        return Err(Error::arg("the discrepancy function needs a non-empty point set"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::arg(format!("abscissa {x} is outside [0,1]")));
    }
    Ok(ps.count_le(x) as f64 / ps.len() as f64 - x)
}

/// Outcome of [`predict_next`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub point: UnitPoint,
    /// `max_x R(x)`, the running integral of `sign Δ` at the prediction.
    pub peak: f64,
}

/// Exact `R(x) = ∫_0^x sign[Δ(y)] dy`.
pub fn running_sign_integral(ps: &SortedPointSet, x: f64) -> Result<f64> {
    let delta = DiscrepancyFunction::new(ps)?;
    let n = ps.len() as f64;
    let x = x.clamp(0.0, 1.0);
    let mut acc = 0.0;
    for (lo, hi, c) in delta.pieces() {
        if lo >= x {
            break;
        }
        let hi = hi.min(x);
        // Δ = c/n − y is positive before its root and negative after.
        let root = (c as f64 / n).clamp(lo, hi);
        acc += (root - lo) - (hi - root);
    }
    Ok(acc)
}

/// Maximiser of the running integral of `sign Δ`, ties to the smallest `x`.
pub fn predict_next(ps: &SortedPointSet) -> Result<Prediction> {
    let delta = DiscrepancyFunction::new(ps)?;
    let n = ps.len() as f64;
    let mut acc = 0.0;
    let mut best = (0.0, 0.0);
    for (lo, hi, c) in delta.pieces() {
        let root = (c as f64 / n).clamp(lo, hi);
        let peak = acc + (root - lo);
        if peak > best.0 + PEAK_TIE_TOLERANCE {
            best = (peak, root);
        }
        acc = peak - (hi - root);
    }
    Ok(Prediction {
        point: UnitPoint::new(best.1)?,
        peak: best.0,
    })
}
