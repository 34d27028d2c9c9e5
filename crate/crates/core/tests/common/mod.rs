//! Independent reference implementations used across the integration tests.
//! They favour directness over speed and share no code with the library
//! paths they check.

#![allow(dead_code)]

use greedy_sampling::{GridKind, SortedPointSet};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

pub fn rng(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

/// Sorted random values; a quarter of the draws snap to a coarse grid so
/// that duplicates and ties show up.
pub fn random_values(rng: &mut Pcg64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            if rng.random_bool(0.25) {
                (x * 16.0).round() / 16.0
            } else {
                x
            }
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn set(values: &[f64]) -> SortedPointSet {
    SortedPointSet::from_values(values).unwrap()
}

fn count_le(values: &[f64], x: f64) -> usize {
    values.iter().filter(|&&v| v <= x).count()
}

fn count_lt(values: &[f64], x: f64) -> usize {
    values.iter().filter(|&&v| v < x).count()
}

/// `sup_x |F(x) − x|`, probing `F` just left of and at every point and at 1.
pub fn star_oracle(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut best: f64 = 0.0;
    for &x in values.iter().chain([0.0, 1.0].iter()) {
        best = best.max((count_le(values, x) as f64 / n - x).abs());
        best = best.max((count_lt(values, x) as f64 / n - x).abs());
    }
    best
}

/// `sup_J |#(J)/n − |J||` over all subintervals with endpoints in
/// `{0, x_i, 1}`, in all four open/closed variants. `values` must be sorted.
pub fn extreme_oracle(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut ends: Vec<f64> = values.to_vec();
    ends.push(0.0);
    ends.push(1.0);
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    let le: Vec<f64> = ends.iter().map(|&e| values.partition_point(|&v| v <= e) as f64).collect();
    let lt: Vec<f64> = ends.iter().map(|&e| values.partition_point(|&v| v < e) as f64).collect();
    let mut best: f64 = 0.0;
    for i in 0..ends.len() {
        for j in i..ends.len() {
            let len = ends[j] - ends[i];
            let closed = le[j] - lt[i];
            let open = (lt[j] - le[i]).max(0.0);
            let half_l = lt[j] - lt[i];
            let half_r = le[j] - le[i];
            for c in [closed, open, half_l, half_r] {
                best = best.max((c / n - len).abs());
            }
        }
    }
    best
}

/// Midpoint-rule `∫ |F(x) − x| dx` with `panels` cells.
pub fn l1_riemann(values: &[f64], panels: usize) -> f64 {
    let n = values.len() as f64;
    let h = 1.0 / panels as f64;
    let mut idx = 0;
    let mut acc = 0.0;
    for k in 0..panels {
        let x = (k as f64 + 0.5) * h;
        while idx < values.len() && values[idx] <= x {
            idx += 1;
        }
        acc += (idx as f64 / n - x).abs();
    }
    acc * h
}

/// `Σ |x_(i) − t_i|` by a plain loop over sorted values.
pub fn naive_energy(sorted: &[f64], kind: GridKind) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let t = match kind {
                GridKind::End => (i + 1) as f64 / n,
                GridKind::Centered => (2 * i + 1) as f64 / (2.0 * n),
            };
            (x - t).abs()
        })
        .sum()
}

fn with_point(values: &[f64], x: f64) -> Vec<f64> {
    let mut v = values.to_vec();
    let pos = v.partition_point(|&y| y <= x);
    v.insert(pos, x);
    v
}

/// Brute force over the end-grid candidates `k/(n+1)`: `(k, energy)` of the
/// first minimiser.
pub fn end_grid_candidate_oracle(values: &[f64]) -> (usize, f64) {
    let n1 = values.len() + 1;
    let mut best = (0, f64::INFINITY);
    for k in 1..=n1 {
        let e = naive_energy(&with_point(values, k as f64 / n1 as f64), GridKind::End);
        if e < best.1 {
            best = (k, e);
        }
    }
    best
}

/// Minimum of the augmented energy over every breakpoint of the piecewise
/// linear map `x ↦ E(values ∪ {x})`: existing points, all possible targets,
/// and the ends.
pub fn breakpoint_oracle(values: &[f64], kind: GridKind) -> (f64, f64) {
    let n1 = values.len() + 1;
    let mut cands: Vec<f64> = values.to_vec();
    cands.extend([0.0, 1.0]);
    for i in 1..=n1 {
        cands.push(match kind {
            GridKind::End => i as f64 / n1 as f64,
            GridKind::Centered => (2 * i - 1) as f64 / (2.0 * n1 as f64),
        });
    }
    cands.sort_by(f64::total_cmp);
    let mut best = (0.0, f64::INFINITY);
    for x in cands {
        let e = naive_energy(&with_point(values, x), kind);
        if e < best.1 {
            best = (x, e);
        }
    }
    best
}

/// Exact `∫_0^1 (F(t) − t)² dt` of a sorted multiset.
pub fn l2_star_squared(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut acc = 0.0;
    let mut left = 0.0;
    for k in 0..=sorted.len() {
        let right = sorted.get(k).copied().unwrap_or(1.0);
        let c = k as f64 / n;
        acc += ((c - left).powi(3) - (c - right).powi(3)) / 3.0;
        left = right;
    }
    acc
}

pub fn kritzinger_objective(values: &[f64], x: f64) -> f64 {
    l2_star_squared(&with_point(values, x))
}

pub fn bernoulli_objective(values: &[f64], x: f64) -> f64 {
    values
        .iter()
        .map(|&v| {
            let f = (x - v).rem_euclid(1.0);
            f * f - f + 1.0 / 6.0
        })
        .sum()
}

/// Grid search at `1/steps` followed by golden-section refinement in the
/// best few cells. Returns `(x, f(x))`.
pub fn grid_search_min(f: &dyn Fn(f64) -> f64, steps: usize) -> (f64, f64) {
    let vals: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let x = i as f64 / steps as f64;
            (x, f(x))
        })
        .collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].1.total_cmp(&vals[b].1));
    let mut best = vals[order[0]];
    for &i in order.iter().take(8) {
        let lo = vals[i.saturating_sub(1)].0;
        let hi = vals[(i + 1).min(steps)].0;
        let (x, fx) = golden(f, lo, hi);
        if fx < best.1 || (fx == best.1 && x < best.0) {
            best = (x, fx);
        }
    }
    best
}

fn golden(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = if f(a) <= f(b) { (a, f(a)) } else { (b, f(b)) };
    for _ in 0..200 {
        if b - a < 1e-12 {
            break;
        }
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        let (fc, fd) = (f(c), f(d));
        for cand in [(c, fc), (d, fd)] {
            if cand.1 < best.1 {
                best = cand;
            }
        }
        if fc <= fd {
            b = d;
        } else {
            a = c;
        }
    }
    best
}
