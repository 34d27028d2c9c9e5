//! The greedy energy-minimising extension step.
//!
//! For sorted `x_1 ≤ … ≤ x_n`, placing the new point in slot `j` (after `x_j`)
//! shifts every later point's target by one grid step. Sweeping `j` from 0 to
//! `n` therefore changes exactly one term of the sum per slot, so all `n + 1`
//! slot energies come out of a single O(n) pass. For the end grid the optimal
//! value inside slot `j` is always `(j + 1)/(n + 1)`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::point_set::{energy_of, format_real, GridKind, Rational, SortedPointSet, UnitPoint};

/// Lower bound on the average of two consecutive energies.
pub const AVERAGE_ENERGY_FLOOR: f64 = 0.125;

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyStepResult {
    pub chosen: UnitPoint,
    /// Number of existing points `<= chosen`.
    pub slot: usize,
    pub new_energy: f64,
    /// Energy of every slot's best candidate, when requested.
    pub candidate_energies: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    /// Set size after the step.
    pub n: usize,
    pub chosen: UnitPoint,
    pub energy: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyTrace {
    pub start_size: usize,
    pub entries: Vec<TraceEntry>,
}

impl EnergyTrace {
    pub fn new(start_size: usize) -> Self {
        Self {
            start_size,
            entries: Vec::new(),
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.energy).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, entry: TraceEntry) -> Result<()> {
        if let Some(last) = self.entries.last() {
            if entry.n <= last.n {
                return Err(Error::arg(format!("trace entry n={} after n={}", entry.n, last.n)));
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    /// Writes `n,chosen,energy` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,chosen,energy")?;
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.n, format_real(e.chosen.value()), format_real(e.energy))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut trace = EnergyTrace::default();
        for (idx, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if idx == 0 {
                if line != "n,chosen,energy" {
                    return Err(Error::Parse {
                        line: 1,
                        message: format!("unexpected header {line:?}"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse { line: idx + 1, message };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(bad(format!("expected 3 columns, got {}", cols.len())));
            }
            let n: usize = cols[0].parse().map_err(|e| bad(format!("{e}")))?;
            let chosen: f64 = cols[1].parse().map_err(|e| bad(format!("{e}")))?;
            let energy: f64 = cols[2].parse().map_err(|e| bad(format!("{e}")))?;
            if trace.entries.is_empty() {
                trace.start_size = n.saturating_sub(1);
            }
            let chosen = UnitPoint::new(chosen).map_err(|e| bad(e.to_string()))?;
            trace.push(TraceEntry { n, chosen, energy }).map_err(|e| bad(e.to_string()))?;
        }
        Ok(trace)
    }
}

/// Global minimiser of `E(x_1, …, x_n, x)` over `x ∈ [0,1]`, in O(n).
///
/// Ties between slots go to the leftmost slot (exact float comparison).
pub fn next_point(ps: &SortedPointSet, kind: GridKind) -> GreedyStepResult {
    sweep(ps, kind, false)
}

/// [`next_point`] that also returns the per-slot energies.
pub fn next_point_with_diagnostics(ps: &SortedPointSet, kind: GridKind) -> GreedyStepResult {
    sweep(ps, kind, true)
}

fn sweep(ps: &SortedPointSet, kind: GridKind, diagnostics: bool) -> GreedyStepResult {
    let xs = ps.values();
    let n = xs.len();
    let denom = (n + 1) as f64;
    let inv = 1.0 / denom;
    let half_inv = 0.5 * inv;
    // Target of x_i (1-indexed) when the new point sits before it.
    let target_if_new_before = |i: usize| match kind {
        GridKind::End => (i + 1) as f64 * inv,
        GridKind::Centered => (2 * i + 1) as f64 * half_inv,
    };

    let mut base = NeumaierSum::new();
    for (i, &x) in xs.iter().enumerate() {
        base.add((x - target_if_new_before(i + 1)).abs());
    }
    let base = base.value();

    let centered_candidate = |j: usize| -> (f64, f64) {
        let ideal = (2 * j + 1) as f64 / (2.0 * denom);
        let lo = if j == 0 { 0.0 } else { xs[j - 1] };
        let hi = if j == n { 1.0 } else { xs[j] };
        let c = ideal.clamp(lo, hi);
        (c, (c - ideal).abs())
    };

    let mut diag = diagnostics.then(|| Vec::with_capacity(n + 1));
    let mut prefix = NeumaierSum::new();
    let mut best_slot = 0usize;
    let mut best = match kind {
        GridKind::End => 0.0,
        GridKind::Centered => centered_candidate(0).1,
    };
    if let Some(d) = diag.as_mut() {
        d.push(base + best);
    }
    // One loop per grid keeps the kind dispatch out of the hot path.
    let mut consider = |i: usize, value: f64| {
        if let Some(d) = diag.as_mut() {
            d.push(base + value);
        }
        if value < best {
            best = value;
            best_slot = i;
        }
    };
    match kind {
        GridKind::End => {
            for (idx, &x) in xs.iter().enumerate() {
                let i = idx + 1;
                prefix.add((x - i as f64 * inv).abs() - (x - (i + 1) as f64 * inv).abs());
                consider(i, prefix.value());
            }
        }
        GridKind::Centered => {
            for (idx, &x) in xs.iter().enumerate() {
                let i = idx + 1;
                prefix.add((x - (2 * i - 1) as f64 * half_inv).abs() - (x - (2 * i + 1) as f64 * half_inv).abs());
                consider(i, prefix.value() + centered_candidate(i).1);
            }
        }
    }

    let chosen = match kind {
        GridKind::End => UnitPoint::from_ratio(best_slot as u64 + 1, n as u64 + 1).expect("k <= n + 1"),
        GridKind::Centered => {
            let (c, residual) = centered_candidate(best_slot);
            let rational = if residual == 0.0 {
                Some(Rational::new(2 * best_slot as u64 + 1, 2 * (n as u64 + 1)).expect("valid"))
            } else if c == 0.0 {
                Some(Rational { num: 0, den: 1 })
            } else if c == 1.0 {
                Some(Rational { num: 1, den: 1 })
            } else if best_slot > 0 && c == xs[best_slot - 1] {
                ps.get(best_slot - 1).and_then(|p| p.rational())
            } else {
                ps.get(best_slot).and_then(|p| p.rational())
            };
            match rational {
                Some(r) => UnitPoint::with_rational(c, r).unwrap_or_else(|_| UnitPoint::new(c).expect("in [0,1]")),
                None => UnitPoint::new(c).expect("in [0,1]"),
            }
        }
    };
    GreedyStepResult {
        chosen,
        slot: ps.count_le(chosen.value()),
        new_energy: base + best,
        candidate_energies: diag,
    }
}

/// Endless greedy extension of a point set.
#[derive(Clone, Debug)]
pub struct GreedySequence {
    set: SortedPointSet,
    kind: GridKind,
}

impl GreedySequence {
    pub fn new(seed: SortedPointSet, kind: GridKind) -> Self {
        Self { set: seed, kind }
    }

    pub fn set(&self) -> &SortedPointSet {
        &self.set
    }

    pub fn into_set(self) -> SortedPointSet {
        self.set
    }
}

impl Iterator for GreedySequence {
    type Item = TraceEntry;

    fn next(&mut self) -> Option<TraceEntry> {
        let step = next_point(&self.set, self.kind);
        self.set.insert_in_place(step.chosen);
        Some(TraceEntry {
            n: self.set.len(),
            chosen: step.chosen,
            energy: step.new_energy,
        })
    }
}

/// Adds `count` greedy points and records every step.
pub fn extend(ps: &SortedPointSet, count: usize, kind: GridKind) -> Result<(SortedPointSet, EnergyTrace)> {
    if count == 0 {
        return Err(Error::arg("extend needs a positive count"));
    }
    let mut trace = EnergyTrace::new(ps.len());
    let mut seq = GreedySequence::new(ps.clone(), kind);
    trace.entries.reserve(count);
    trace.entries.extend(seq.by_ref().take(count));
    Ok((seq.into_set(), trace))
}

/// Whether `(E_n + E_{n+1}) / 2 >= 1/8` after one greedy step from `ps`.
pub fn average_energy_lower_bound_check(ps: &SortedPointSet) -> Result<bool> {
    let before = energy_of(ps, GridKind::End)?;
    let after = next_point(ps, GridKind::End).new_energy;
    Ok(0.5 * (before + after) >= AVERAGE_ENERGY_FLOOR - 1e-12)
}

/// Finite-size lower bound on `(E_n + E_{n+1}) / 2`:
/// `Σ_i min(i, n − i) / (2n(n+1)) = ⌊n²/4⌋ / (2n(n+1))`, attained by the
/// perfect grid `{i/n}`. It approaches 1/8 from below as `n` grows.
pub fn average_energy_floor(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    (n * n / 4.0).floor() / (2.0 * n * (n + 1.0))
}
