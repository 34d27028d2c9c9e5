//! Exact discrepancy measures of a finite point set in `[0,1]`.
//!
//! The empirical CDF is right-continuous: `F(x) = #{x_i <= x} / n`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::point_set::{format_real, SortedPointSet};

/// One row of discrepancy measurements for an `n`-point set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub n: usize,
    pub star: f64,
    pub extreme: f64,
    /// `∫ |F(x) − x| dx`, the Wasserstein-1 distance to the uniform measure.
    pub l1_star: f64,
    pub periodic_l2: f64,
    /// `n · D*_n / ln n`, absent for `n < 2`.
    pub scaled_star: Option<f64>,
    pub scaled_extreme: Option<f64>,
}

pub const REPORT_CSV_HEADER: &str = "n,star,extreme,l1_star,periodic_l2,scaled_star,scaled_extreme";

impl DiscrepancyReport {
    pub fn compute(ps: &SortedPointSet) -> Result<Self> {
        let star = star_discrepancy(ps)?;
        let extreme = extreme_discrepancy(ps)?;
        let n = ps.len();
        Ok(Self {
            n,
            star,
            extreme,
            l1_star: l1_star_discrepancy(ps)?,
            periodic_l2: periodic_l2_discrepancy(ps)?,
            scaled_star: log_scaled(star, n),
            scaled_extreme: log_scaled(extreme, n),
        })
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_real).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            format_real(self.star),
            format_real(self.extreme),
            format_real(self.l1_star),
            format_real(self.periodic_l2),
            opt(self.scaled_star),
            opt(self.scaled_extreme)
        )
    }

    pub fn write_csv<'a, W: Write, I: IntoIterator<Item = &'a DiscrepancyReport>>(
        mut out: W,
        rows: I,
    ) -> std::io::Result<()> {
        writeln!(out, "{REPORT_CSV_HEADER}")?;
        for r in rows {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

/// `n · d / ln n` for `n >= 2`.
pub fn log_scaled(d: f64, n: usize) -> Option<f64> {
    (n >= 2).then(|| n as f64 * d / (n as f64).ln())
}

fn non_empty(ps: &SortedPointSet) -> Result<()> {
    if ps.is_empty() {
        Err(Error::arg("discrepancy of an empty point set"))
    } else {
        Ok(())
    }
}

/// `D*_n = 1/(2n) + max_i |x_(i) − (2i − 1)/(2n)|`.
pub fn star_discrepancy(ps: &SortedPointSet) -> Result<f64> {
    non_empty(ps)?;
    let n = ps.len() as f64;
    let dev = ps
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - (2 * i + 1) as f64 / (2.0 * n)).abs())
        .fold(0.0, f64::max);
    Ok(0.5 / n + dev)
}

/// Supremum over all subintervals of `|#(J)/n − |J||`, via
/// `max_i (i/n − x_(i))_+ + max_i (x_(i) − (i − 1)/n)_+`.
pub fn extreme_discrepancy(ps: &SortedPointSet) -> Result<f64> {
    non_empty(ps)?;
    let n = ps.len() as f64;
    let (mut excess, mut deficit) = (0.0f64, 0.0f64);
    for (i, &x) in ps.values().iter().enumerate() {
        excess = excess.max((i + 1) as f64 / n - x);
        deficit = deficit.max(x - i as f64 / n);
    }
    Ok(excess + deficit)
}

/// Exact `∫_0^1 |F(x) − x| dx` over the piecewise-constant empirical CDF.
pub fn l1_star_discrepancy(ps: &SortedPointSet) -> Result<f64> {
    non_empty(ps)?;
    let xs = ps.values();
    let n = xs.len() as f64;
    let mut acc = NeumaierSum::new();
    let mut left = 0.0;
    for k in 0..=xs.len() {
        let right = xs.get(k).copied().unwrap_or(1.0);
        acc.add(abs_linear_integral(k as f64 / n, left, right));
        left = right;
    }
    Ok(acc.value())
}

/// `∫_a^b |c − x| dx`.
fn abs_linear_integral(c: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        0.0
    } else if c <= a {
        0.5 * ((b - c) * (b - c) - (a - c) * (a - c))
    } else if c >= b {
        0.5 * ((c - a) * (c - a) - (c - b) * (c - b))
    } else {
        0.5 * ((c - a) * (c - a) + (b - c) * (b - c))
    }
}

/// The 1-periodic second Bernoulli polynomial `{x}² − {x} + 1/6`.
#[inline]
pub fn bernoulli2_periodic(x: f64) -> f64 {
    let f = x - x.floor();
    f * f - f + 1.0 / 6.0
}

/// Periodic L2 discrepancy `−1/3 + n⁻² Σ_{i,j} (1/3 + p(x_i − x_j))`,
/// evaluated in O(n) from prefix sums over the sorted points.
pub fn periodic_l2_discrepancy(ps: &SortedPointSet) -> Result<f64> {
    non_empty(ps)?;
    let n = ps.len();
    // For sorted x_i >= x_j the difference d lies in [0,1] and
    // p(d) = p(-d) = d² − d + 1/6, so the off-diagonal sum needs only
    // Σ d² and Σ d over pairs i > j.
    let (mut s1, mut s2) = (NeumaierSum::new(), NeumaierSum::new());
    let (mut sum_d, mut sum_d2) = (NeumaierSum::new(), NeumaierSum::new());
    for (i, &x) in ps.values().iter().enumerate() {
        let y = x - 0.5;
        let k = i as f64;
        sum_d.add(k * y - s1.value());
        sum_d2.add(k * y * y - 2.0 * y * s1.value() + s2.value());
        s1.add(y);
        s2.add(y * y);
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let mut total = NeumaierSum::new();
    total.add(n as f64 / 6.0);
    total.add(2.0 * sum_d2.value());
    total.add(-2.0 * sum_d.value());
    total.add(2.0 * pairs / 6.0);
    let nf = n as f64;
    Ok(total.value() / (nf * nf))
}

/// Direct O(n²) evaluation of the periodic L2 double sum.
pub fn periodic_l2_discrepancy_direct(ps: &SortedPointSet) -> Result<f64> {
    non_empty(ps)?;
    let xs = ps.values();
    let mut acc = NeumaierSum::new();
    for &a in xs {
        for &b in xs {
            acc.add(1.0 / 3.0 + bernoulli2_periodic(a - b));
        }
    }
    let n = xs.len() as f64;
    Ok(-1.0 / 3.0 + acc.value() / (n * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_set::UnitPoint;
    use proptest::prelude::*;

    fn set(values: &[f64]) -> SortedPointSet {
        SortedPointSet::from_values(values).unwrap()
    }

    fn centered(n: u64) -> SortedPointSet {
        SortedPointSet::from_points((1..=n).map(|i| UnitPoint::from_ratio(2 * i - 1, 2 * n).unwrap()))
    }

    #[test]
    fn star_examples() {
        assert!((star_discrepancy(&centered(10)).unwrap() - 0.05).abs() < 1e-15);
        assert_eq!(star_discrepancy(&set(&[1.0])).unwrap(), 1.0);
        let grid = set(&[0.25, 0.5, 0.75, 1.0]);
        assert!((star_discrepancy(&grid).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn extreme_examples() {
        assert!((extreme_discrepancy(&centered(10)).unwrap() - 0.1).abs() < 1e-15);
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(extreme_discrepancy(&set(&[x])).unwrap(), 1.0);
        }
    }

    #[test]
    fn l1_examples() {
        assert!((l1_star_discrepancy(&set(&[0.5])).unwrap() - 0.25).abs() < 1e-15);
        // On the grid {i/n}, each cell contributes a triangle of area 1/(2n²).
        let n = 8;
        let grid: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let l1 = l1_star_discrepancy(&set(&grid)).unwrap();
        assert!((l1 - 1.0 / (2.0 * n as f64)).abs() < 1e-15);
    }

    #[test]
    fn periodic_l2_examples() {
        assert!((bernoulli2_periodic(0.5) + 1.0 / 12.0).abs() < 1e-15);
        assert!((bernoulli2_periodic(-0.25) - bernoulli2_periodic(0.75)).abs() < 1e-15);
        for x in [0.0, 0.37, 1.0] {
            let v = periodic_l2_discrepancy(&set(&[x])).unwrap();
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
        let expected = -1.0 / 3.0 + 0.25 * (4.0 / 3.0 + 1.0 / 3.0 - 1.0 / 6.0);
        let ps = set(&[0.0, 0.5]);
        assert!((periodic_l2_discrepancy_direct(&ps).unwrap() - expected).abs() < 1e-15);
        assert!((periodic_l2_discrepancy(&ps).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn empty_sets_are_rejected() {
        let empty = SortedPointSet::new();
        assert!(star_discrepancy(&empty).is_err());
        assert!(extreme_discrepancy(&empty).is_err());
        assert!(l1_star_discrepancy(&empty).is_err());
        assert!(periodic_l2_discrepancy(&empty).is_err());
        assert!(DiscrepancyReport::compute(&empty).is_err());
    }

    #[test]
    fn report_scaling_and_csv() {
        let r = DiscrepancyReport::compute(&set(&[0.5])).unwrap();
        assert_eq!(r.scaled_star, None);
        assert!(r.csv_row().ends_with(",,"));
        let r = DiscrepancyReport::compute(&centered(10)).unwrap();
        assert!((r.scaled_star.unwrap() - 10.0 * 0.05 / 10f64.ln()).abs() < 1e-15);
        assert_eq!(r.csv_row().split(',').count(), 7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn prefix_l2_matches_direct(values in prop::collection::vec(0.0f64..=1.0, 1..1000)) {
            let ps = set(&values);
            let a = periodic_l2_discrepancy(&ps).unwrap();
            let b = periodic_l2_discrepancy_direct(&ps).unwrap();
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }

        #[test]
        fn metric_sandwiches(values in prop::collection::vec(0.0f64..=1.0, 1..300)) {
            let r = DiscrepancyReport::compute(&set(&values)).unwrap();
            let slack = 1e-12;
            prop_assert!(r.star >= 0.5 / r.n as f64 - slack);
            prop_assert!(r.star <= 1.0 + slack);
            prop_assert!(r.star <= r.extreme + slack);
            prop_assert!(r.extreme <= 2.0 * r.star + slack);
            prop_assert!(r.l1_star <= r.star + slack);
        }
    }
}
