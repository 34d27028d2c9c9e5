mod common;

use greedy_sampling::baselines::van_der_corput;
use greedy_sampling::metrics::{
    extreme_discrepancy, l1_star_discrepancy, log_scaled, periodic_l2_discrepancy, periodic_l2_discrepancy_direct,
    star_discrepancy, DiscrepancyReport,
};
use greedy_sampling::{energy_of, GridKind, SortedPointSet};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn star_and_extreme_match_oracles() {
    let mut rng = common::rng(21);
    for _ in 0..500 {
        let n = rng.random_range(1..=120);
        let v = common::random_values(&mut rng, n);
        let ps = common::set(&v);
        assert!((star_discrepancy(&ps).unwrap() - common::star_oracle(&v)).abs() < 1e-12);
        assert!((extreme_discrepancy(&ps).unwrap() - common::extreme_oracle(&v)).abs() < 1e-12);
    }
}

#[test]
fn l1_matches_midpoint_rule() {
    let mut rng = common::rng(22);
    for _ in 0..100 {
        let n = rng.random_range(1..=50);
        let v = common::random_values(&mut rng, n);
        let exact = l1_star_discrepancy(&common::set(&v)).unwrap();
        // Each jump costs at most one cell of error.
        let approx = common::l1_riemann(&v, 200_000);
        assert!((exact - approx).abs() < (n as f64 + 2.0) / 200_000.0, "{exact} vs {approx}");
    }
}

#[test]
fn periodic_l2_fast_matches_direct() {
    let mut rng = common::rng(23);
    for _ in 0..300 {
        let n = rng.random_range(1..=150);
        let ps = common::set(&common::random_values(&mut rng, n));
        let fast = periodic_l2_discrepancy(&ps).unwrap();
        let direct = periodic_l2_discrepancy_direct(&ps).unwrap();
        assert!((fast - direct).abs() < 1e-12, "{fast} vs {direct}");
        assert!(fast >= -1e-14);
    }
}

#[test]
fn van_der_corput_dyadic_prefixes() {
    for k in 0..=12u32 {
        let n = 1u64 << k;
        let ps = SortedPointSet::from_points((0..n).map(van_der_corput));
        let expected = 1.0 / n as f64;
        assert!((star_discrepancy(&ps).unwrap() - expected).abs() < 1e-15, "k={k}");
        assert!((extreme_discrepancy(&ps).unwrap() - expected).abs() < 1e-15, "k={k}");
        assert!((l1_star_discrepancy(&ps).unwrap() - 0.5 / n as f64).abs() < 1e-15);
    }
}

#[test]
fn energy_and_wasserstein_are_within_half_a_cell() {
    let mut rng = common::rng(24);
    for _ in 0..500 {
        let n = rng.random_range(1..=300);
        let ps = common::set(&common::random_values(&mut rng, n));
        let w1 = l1_star_discrepancy(&ps).unwrap();
        let e = energy_of(&ps, GridKind::End).unwrap() / n as f64;
        assert!((w1 - e).abs() <= 0.5 / n as f64 + 1e-12, "n={n}: {w1} vs {e}");
    }
}

#[test]
fn report_is_consistent() {
    let ps = common::set(&[0.1, 0.35, 0.6, 0.9]);
    let r = DiscrepancyReport::compute(&ps).unwrap();
    assert_eq!(r.n, 4);
    assert_eq!(r.star, star_discrepancy(&ps).unwrap());
    assert_eq!(r.scaled_star, log_scaled(r.star, 4));
    assert!(r.star <= r.extreme && r.extreme <= 2.0 * r.star + 1e-15);
    assert!(log_scaled(0.5, 1).is_none());
    assert!(star_discrepancy(&SortedPointSet::new()).is_err());
}

proptest! {
    #[test]
    fn discrepancy_bounds(values in prop::collection::vec(0.0f64..=1.0, 1..200)) {
        let ps = SortedPointSet::from_values(&values).unwrap();
        let n = values.len() as f64;
        let star = star_discrepancy(&ps).unwrap();
        let ext = extreme_discrepancy(&ps).unwrap();
        prop_assert!(star >= 0.5 / n - 1e-15 && star <= 1.0);
        prop_assert!(ext >= star - 1e-15 && ext <= 2.0 * star + 1e-15);
        prop_assert!(ext >= 1.0 / n - 1e-15);
        prop_assert!(l1_star_discrepancy(&ps).unwrap() <= star + 1e-15);
    }
}
