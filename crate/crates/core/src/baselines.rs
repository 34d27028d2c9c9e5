//! Comparison sequences: van der Corput, the golden-ratio Kronecker sequence,
//! the greedy L2-star (Kritzinger) sequence and the greedy periodic Bernoulli
//! sequence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::next_point;
use crate::metrics::bernoulli2_periodic;
use crate::numeric::NeumaierSum;
use crate::point_set::{GridKind, SortedPointSet, UnitPoint};

/// `⌊2^128 (φ − 1)⌋`. Since `{iφ} = {i(φ − 1)}`, wrapping multiplication by
/// this constant yields `{iφ}` with error below `i · 2^-128`.
const GOLDEN_FRACTION_FIXED: u128 = 0x9e37_79b9_7f4a_7c15_f39c_c060_5ced_c834;

/// Relative slack under which two greedy objective values count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

fn improves(value: f64, best: f64) -> bool {
    best == f64::INFINITY || value < best - TIE_TOLERANCE * best.abs().max(1.0)
}

/// Radical inverse of `i` in base 2. `van_der_corput(0)` is 0.
pub fn van_der_corput(i: u64) -> UnitPoint {
    if i == 0 {
        return UnitPoint::from_ratio(0, 1).expect("valid");
    }
    let bits = 64 - i.leading_zeros();
    let num = i.reverse_bits() >> (64 - bits);
    if bits <= 53 {
        UnitPoint::from_ratio(num, 1 << bits).expect("num < den")
    } else {
        // Truncate to 53 bits so the value stays exactly representable and below 1.
        let top = num >> (bits - 53);
        UnitPoint::new(top as f64 * (-53f64).exp2()).expect("in [0,1)")
    }
}

/// `{iφ}` with `φ` the golden ratio, evaluated in 128-bit fixed point.
pub fn kronecker_golden(i: u64) -> UnitPoint {
    let frac = (i as u128).wrapping_mul(GOLDEN_FRACTION_FIXED);
    let top = (frac >> 75) as u64;
    UnitPoint::new(top as f64 * (-53f64).exp2()).expect("in [0,1)")
}

/// The fixed-point golden fraction, exposed for verification.
pub fn golden_fraction_fixed() -> u128 {
    GOLDEN_FRACTION_FIXED
}

/// Squared L2 star discrepancy `∫ (F(t) − t)² dt` of `ps ∪ {y}`, up to an
/// additive term that does not depend on `y`, scaled by `(n+1)²`.
///
/// With `k` points at or below `y` and prefix sum `S_k`, this equals
/// `(n+1) y² − (2k+1) y + 2 S_k`.
fn kritzinger_piece(n1: f64, k: usize, prefix: f64, y: f64) -> f64 {
    y * (n1 * y - (2 * k + 1) as f64) + 2.0 * prefix
}

/// Minimiser of the L2 star discrepancy of `ps ∪ {x}` over `x ∈ [0,1]`.
///
/// The objective is a convex quadratic on each gap between consecutive
/// points; each gap is minimised at its clamped vertex. Ties go to the
/// smaller `x`.
pub fn kritzinger_next(ps: &SortedPointSet) -> Result<UnitPoint> {
    if ps.is_empty() {
        return Err(Error::arg("the Kritzinger step needs a non-empty point set"));
    }
    let xs = ps.values();
    let n = xs.len();
    let n1 = (n + 1) as f64;
    let mut prefix = NeumaierSum::new();
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=n {
        if k > 0 {
            prefix.add(xs[k - 1]);
        }
        let lo = if k == 0 { 0.0 } else { xs[k - 1] };
        let hi = if k == n { 1.0 } else { xs[k] };
        let y = ((2 * k + 1) as f64 / (2.0 * n1)).clamp(lo, hi);
        let value = kritzinger_piece(n1, k, prefix.value(), y);
        if improves(value, best.0) {
            best = (value, y);
        }
    }
    UnitPoint::new(best.1)
}

/// `Σ_k p(x − x_k)` with `p` the periodic second Bernoulli polynomial.
pub fn periodic_bernoulli_objective(ps: &SortedPointSet, x: f64) -> f64 {
    ps.values().iter().map(|&xk| bernoulli2_periodic(x - xk)).sum()
}

/// Minimiser of `Σ_k p(x − x_k)` over `x ∈ [0,1]`, ties to the smaller `x`.
///
/// On the gap with `j` points at or below `x`, `{x − x_k} = x − c_k` with
/// `c_k = x_k` for the first `j` points and `x_k − 1` for the rest, so the
/// objective is `n u² − n u + V + n/6` with `u = x − mean(c)` and `V` the
/// centred sum of squares of `c`. Each gap is minimised at its clamped vertex.
pub fn periodic_bernoulli_next(ps: &SortedPointSet) -> Result<UnitPoint> {
    if ps.is_empty() {
        return Err(Error::arg("the periodic Bernoulli step needs a non-empty point set"));
    }
    let xs = ps.values();
    let n = xs.len();
    let nf = n as f64;
    let total: f64 = xs.iter().sum();
    let total_sq: f64 = xs.iter().map(|x| x * x).sum();
    let mut below = NeumaierSum::new();
    let mut below_sq = NeumaierSum::new();
    let mut best = (f64::INFINITY, 0.0);
    for j in 0..=n {
        if j > 0 {
            below.add(xs[j - 1]);
            below_sq.add(xs[j - 1] * xs[j - 1]);
        }
        let above = total - below.value();
        let above_count = (n - j) as f64;
        let sum_c = total - above_count;
        let sum_c2 = total_sq - 2.0 * above + above_count;
        let mean = sum_c / nf;
        let spread = sum_c2 - nf * mean * mean;
        let lo = if j == 0 { 0.0 } else { xs[j - 1] };
        let hi = if j == n { 1.0 } else { xs[j] };
        let x = (mean + 0.5).clamp(lo, hi);
        let u = x - mean;
        let value = nf * (u * u - u) + spread + nf / 6.0;
        if improves(value, best.0) {
            best = (value, x);
        }
    }
    UnitPoint::new(best.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    VanDerCorput,
    KroneckerGolden,
    Kritzinger,
    PeriodicBernoulli,
    /// The greedy transport-energy sequence on the given grid.
    Energy(GridKind),
}

impl SequenceKind {
    /// Whether each point depends on the points already present.
    pub fn is_greedy(self) -> bool {
        !matches!(self, Self::VanDerCorput | Self::KroneckerGolden)
    }
}

/// Deterministic point stream of one [`SequenceKind`].
///
/// Index sequences emit their `i`-th element for `i = 1, 2, …` and ignore
/// the seed. Greedy sequences start from the seed points and emit the next
/// greedy choice against everything seen so far.
#[derive(Clone, Debug)]
pub struct SequenceGenerator {
    kind: SequenceKind,
    index: u64,
    set: SortedPointSet,
}

impl SequenceGenerator {
    pub fn new(kind: SequenceKind, seed_points: SortedPointSet) -> Result<Self> {
        if matches!(kind, SequenceKind::Kritzinger | SequenceKind::PeriodicBernoulli) && seed_points.is_empty() {
            return Err(Error::arg(format!("{kind:?} needs at least one seed point")));
        }
        let set = if kind.is_greedy() { seed_points } else { SortedPointSet::new() };
        Ok(Self { kind, index: 0, set })
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    /// Current point set of a greedy generator (seed plus emitted points);
    /// empty for index sequences.
    pub fn set(&self) -> &SortedPointSet {
        &self.set
    }

    pub fn next_point(&mut self) -> UnitPoint {
        self.index += 1;
        let p = match self.kind {
            SequenceKind::VanDerCorput => return van_der_corput(self.index),
            SequenceKind::KroneckerGolden => return kronecker_golden(self.index),
            SequenceKind::Kritzinger => kritzinger_next(&self.set).expect("seed is non-empty"),
            SequenceKind::PeriodicBernoulli => periodic_bernoulli_next(&self.set).expect("seed is non-empty"),
            SequenceKind::Energy(grid) => next_point(&self.set, grid).chosen,
        };
        self.set.insert_in_place(p);
        p
    }
}

impl Iterator for SequenceGenerator {
    type Item = UnitPoint;

    fn next(&mut self) -> Option<UnitPoint> {
        Some(self.next_point())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_set::Rational;

    fn set(values: &[f64]) -> SortedPointSet {
        SortedPointSet::from_values(values).unwrap()
    }

    #[test]
    fn van_der_corput_small_indices() {
        assert_eq!(van_der_corput(1).value(), 0.5);
        assert_eq!(van_der_corput(2).value(), 0.25);
        assert_eq!(van_der_corput(3).value(), 0.75);
        assert_eq!(van_der_corput(6).value(), 0.375);
        assert_eq!(van_der_corput(6).rational(), Some(Rational { num: 3, den: 8 }));
        assert!(van_der_corput(u64::MAX).value() < 1.0);
    }

    #[test]
    fn kronecker_small_indices() {
        assert!((kronecker_golden(1).value() - 0.618_033_988_749_894_8).abs() < 1e-15);
        assert!((kronecker_golden(2).value() - 0.236_067_977_499_789_7).abs() < 1e-15);
        assert!((kronecker_golden(5).value() - 0.090_169_943_749_474_2).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(periodic_bernoulli_next(&set(&[0.0])).unwrap().value(), 0.5);
        let two = periodic_bernoulli_next(&set(&[0.0, 0.5])).unwrap().value();
        assert!((two - 0.25).abs() < 1e-15, "{two}");
        assert!(periodic_bernoulli_next(&SortedPointSet::new()).is_err());
    }

    #[test]
    fn kritzinger_examples() {
        // f(y) on {1/2}: pieces 2y² − y (y ≤ 1/2) and 2y² − 3y + 1 (y ≥ 1/2),
        // minimised at 1/4 and 3/4 with equal value; tie goes left.
        assert_eq!(kritzinger_next(&set(&[0.5])).unwrap().value(), 0.25);
        assert!(kritzinger_next(&SortedPointSet::new()).is_err());
    }

    #[test]
    fn generator_streams_are_deterministic() {
        for kind in [
            SequenceKind::VanDerCorput,
            SequenceKind::KroneckerGolden,
            SequenceKind::Kritzinger,
            SequenceKind::PeriodicBernoulli,
            SequenceKind::Energy(GridKind::Centered),
        ] {
            let a: Vec<f64> = SequenceGenerator::new(kind, SortedPointSet::default_seed())
                .unwrap()
                .take(200)
                .map(|p| p.value())
                .collect();
            let b: Vec<f64> = SequenceGenerator::new(kind, SortedPointSet::default_seed())
                .unwrap()
                .take(200)
                .map(|p| p.value())
                .collect();
            assert_eq!(a, b);
            assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn greedy_kinds_need_seeds() {
        assert!(SequenceGenerator::new(SequenceKind::Kritzinger, SortedPointSet::new()).is_err());
        assert!(SequenceGenerator::new(SequenceKind::Energy(GridKind::End), SortedPointSet::new()).is_ok());
    }
}
