mod common;

use std::io::BufReader;

use greedy_sampling::greedy::{average_energy_floor, next_point_with_diagnostics};
use greedy_sampling::metrics::star_discrepancy;
use greedy_sampling::point_set::energy_permutation_oracle;
use greedy_sampling::{
    energy, energy_of, extend, next_point, EnergyTrace, GreedySequence, GridKind, SortedPointSet, TargetGrid,
    UnitPoint,
};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn end_grid_matches_candidate_oracle() {
    let mut rng = common::rng(11);
    for _ in 0..1000 {
        let n = rng.random_range(0..=200);
        let values = common::random_values(&mut rng, n);
        let step = next_point(&common::set(&values), GridKind::End);
        let (k, e) = common::end_grid_candidate_oracle(&values);
        assert!((step.new_energy - e).abs() <= 1e-12, "n={n}: {} vs {e}", step.new_energy);
        let r = step.chosen.rational().unwrap();
        assert_eq!(r.den as usize, n + 1);
        if r.num as usize != k {
            // Only acceptable as a floating-point tie.
            let mut with = values.clone();
            with.push(step.chosen.value());
            with.sort_by(f64::total_cmp);
            assert!((common::naive_energy(&with, GridKind::End) - e).abs() <= 1e-12);
        }
    }
}

#[test]
fn end_grid_matches_breakpoint_oracle() {
    let mut rng = common::rng(12);
    for _ in 0..300 {
        let n = rng.random_range(1..=60);
        let values = common::random_values(&mut rng, n);
        let step = next_point(&common::set(&values), GridKind::End);
        let (_, e) = common::breakpoint_oracle(&values, GridKind::End);
        assert!((step.new_energy - e).abs() <= 1e-12);
    }
}

#[test]
fn centered_grid_matches_breakpoint_oracle() {
    let mut rng = common::rng(13);
    for _ in 0..1000 {
        let n = rng.random_range(0..=100);
        let values = common::random_values(&mut rng, n);
        let step = next_point(&common::set(&values), GridKind::Centered);
        let (_, e) = common::breakpoint_oracle(&values, GridKind::Centered);
        assert!((step.new_energy - e).abs() <= 1e-12, "n={n}: {} vs {e}", step.new_energy);
        let mut with = values.clone();
        with.push(step.chosen.value());
        with.sort_by(f64::total_cmp);
        assert!((common::naive_energy(&with, GridKind::Centered) - step.new_energy).abs() <= 1e-12);
    }
}

#[test]
fn interior_slot_lies_strictly_between_neighbours() {
    let mut rng = common::rng(14);
    for _ in 0..1000 {
        let n = rng.random_range(2..=200);
        let values: Vec<f64> = {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let step = next_point(&common::set(&values), GridKind::End);
        let k = step.chosen.rational().unwrap().num as usize;
        assert!((1..=n + 1).contains(&k));
        // The chosen value (k/(n+1)) lands after x_{k−1} and at or before x_k.
        if (2..=n).contains(&k) {
            let x = step.chosen.value();
            assert!(values[k - 2] <= x && x <= values[k - 1], "k={k}");
        }
    }
}

#[test]
fn diagnostics_list_every_slot() {
    let ps = common::set(&[0.1, 0.4, 0.8]);
    let step = next_point_with_diagnostics(&ps, GridKind::End);
    let diag = step.candidate_energies.unwrap();
    assert_eq!(diag.len(), 4);
    for (j, &e) in diag.iter().enumerate() {
        let mut with = ps.values().to_vec();
        with.insert(j, (j + 1) as f64 / 4.0);
        assert!((common::naive_energy(&with, GridKind::End) - e).abs() < 1e-14);
    }
    assert_eq!(diag.iter().copied().fold(f64::INFINITY, f64::min), step.new_energy);
}

#[test]
fn finite_size_floor_always_holds() {
    let mut rng = common::rng(15);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=500);
        let values: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let ps = common::set(&values);
        let avg = 0.5 * (energy_of(&ps, GridKind::End).unwrap() + next_point(&ps, GridKind::End).new_energy);
        assert!(avg >= average_energy_floor(n) - 1e-12, "n={n}: {avg}");
    }
    // The floor approaches 1/8 from below.
    assert!(average_energy_floor(1000) < 0.125 && average_energy_floor(1000) > 0.1248);
}

#[test]
fn single_point_at_one_breaks_the_eighth_bound() {
    // E({1}) = 0, and the best extension {1/2, 1} also has energy 0.
    let ps = common::set(&[1.0]);
    assert_eq!(next_point(&ps, GridKind::End).new_energy, 0.0);
    assert_eq!(average_energy_floor(1), 0.0);
}

#[test]
fn extension_reduces_star_discrepancy() {
    let mut rng = common::rng(16);
    let values: Vec<f64> = (0..50).map(|_| rng.random()).collect();
    let ps = common::set(&values);
    let (ext, trace) = extend(&ps, 60, GridKind::End).unwrap();
    assert_eq!(ext.len(), 110);
    assert_eq!(trace.len(), 60);
    assert!(star_discrepancy(&ext).unwrap() < star_discrepancy(&ps).unwrap());
    let (one, _) = extend(&SortedPointSet::new(), 1, GridKind::End).unwrap();
    assert_eq!(one.values(), &[1.0]);
}

#[test]
fn sequence_matches_repeated_steps() {
    let seq: Vec<f64> = GreedySequence::new(SortedPointSet::default_seed(), GridKind::End)
        .take(50)
        .map(|e| e.chosen.value())
        .collect();
    let (_, trace) = extend(&SortedPointSet::default_seed(), 50, GridKind::End).unwrap();
    let from_trace: Vec<f64> = trace.entries.iter().map(|e| e.chosen.value()).collect();
    assert_eq!(seq, from_trace);
    assert_eq!(trace.entries[0].n, 3);
}

#[test]
fn trace_round_trips_through_a_file() {
    let (_, trace) = extend(&SortedPointSet::default_seed(), 200, GridKind::Centered).unwrap();
    let dir = std::env::temp_dir().join(format!("gs-trace-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trace.csv");
    trace.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let back = EnergyTrace::read_csv(BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(back.len(), trace.len());
    for (a, b) in back.entries.iter().zip(&trace.entries) {
        assert_eq!(a.n, b.n);
        assert_eq!(a.chosen.value(), b.chosen.value());
        assert_eq!(a.energy, b.energy);
    }
}

#[test]
fn malformed_trace_reports_line() {
    let text = "n,chosen,energy\n3,0.5,0.1\n4,abc,0.2\n";
    match EnergyTrace::read_csv(text.as_bytes()) {
        Err(greedy_sampling::Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn point_file_round_trip() {
    let ps = SortedPointSet::from_points(vec![
        UnitPoint::from_ratio(1, 3).unwrap(),
        UnitPoint::from_ratio(1, 2).unwrap(),
        UnitPoint::new(0.123_456_789_012_345_6).unwrap(),
    ]);
    let dir = std::env::temp_dir().join(format!("gs-points-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pts.txt");
    ps.write_file(&path).unwrap();
    let back = SortedPointSet::read_file(&path).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(back.values(), ps.values());
    assert_eq!(back.get(1).unwrap().rational(), ps.get(1).unwrap().rational());
}

#[test]
#[ignore = "long run: half a million greedy points"]
fn half_million_run_stays_bounded() {
    let (_, trace) = extend(&SortedPointSet::default_seed(), 500_000, GridKind::End).unwrap();
    let hi = trace.energies().into_iter().fold(0.0, f64::max);
    assert!(hi < 2.0, "{hi}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn energy_matches_permutation_oracle(values in prop::collection::vec(0.0f64..=1.0, 1..=7), centered in any::<bool>()) {
        let kind = if centered { GridKind::Centered } else { GridKind::End };
        let pts: Vec<UnitPoint> = values.iter().map(|&v| UnitPoint::new(v).unwrap()).collect();
        let grid = TargetGrid::new(kind, pts.len());
        let oracle = energy_permutation_oracle(&pts, grid).unwrap();
        let fast = energy(&SortedPointSet::from_points(pts), grid).unwrap();
        prop_assert!((oracle - fast).abs() <= 1e-12);
    }

    #[test]
    fn new_energy_is_the_augmented_energy(values in prop::collection::vec(0.0f64..=1.0, 0..150), centered in any::<bool>()) {
        let kind = if centered { GridKind::Centered } else { GridKind::End };
        let ps = SortedPointSet::from_values(&values).unwrap();
        let step = next_point(&ps, kind);
        let after = energy_of(&ps.insert(step.chosen), kind).unwrap();
        prop_assert!((after - step.new_energy).abs() <= 1e-12);
    }
}
