//! Ordered point sets on the unit interval and the discrete transport energy
//! `E(x) = Σ |x_(i) − t_i|` against an equispaced target grid.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Maximum allowed gap between a point's float value and its rational annotation.
pub const RATIONAL_TOLERANCE: f64 = 1.0 / (1u64 << 50) as f64;

/// Largest input accepted by [`energy_permutation_oracle`].
pub const PERMUTATION_ORACLE_LIMIT: usize = 8;

/// Exact fraction `num / den` with `num <= den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num > den {
            return Err(Error::arg(format!("rational {num}/{den} is not in [0,1]")));
        }
        Ok(Self { num, den })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A point of `[0,1]`, optionally annotated with its exact rational value.
///
/// The float is authoritative for ordering; the rational is carried along so
/// long greedy runs can be stored without drift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitPoint {
    value: f64,
    rational: Option<Rational>,
}

impl UnitPoint {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::arg(format!("point {value} is outside [0,1]")));
        }
        Ok(Self { value, rational: None })
    }

    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        let r = Rational::new(num, den)?;
        Ok(Self {
            value: r.to_f64(),
            rational: Some(r),
        })
    }

    pub fn with_rational(value: f64, rational: Rational) -> Result<Self> {
        let p = Self::new(value)?;
        if (value - rational.to_f64()).abs() > RATIONAL_TOLERANCE {
            return Err(Error::arg(format!("point {value} disagrees with its annotation {rational}")));
        }
        Ok(Self {
            rational: Some(rational),
            ..p
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn rational(&self) -> Option<Rational> {
        self.rational
    }
}

/// Which equispaced grid the sorted points are matched against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// Slot `i` targets `i/n`.
    #[default]
    End,
    /// Slot `i` targets `(2i − 1)/(2n)`.
    Centered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TargetGrid {
    pub kind: GridKind,
    pub n: usize,
}

impl TargetGrid {
    pub fn new(kind: GridKind, n: usize) -> Self {
        Self { kind, n }
    }

    /// Target of the 1-indexed slot `i`.
    #[inline]
    pub fn target(&self, i: usize) -> f64 {
        let n = self.n as f64;
        match self.kind {
            GridKind::End => i as f64 / n,
            GridKind::Centered => (2 * i - 1) as f64 / (2.0 * n),
        }
    }
}

/// Multiset of points of `[0,1]` kept in non-decreasing order.
///
/// Values and rational annotations live in parallel vectors so the greedy
/// sweep can stream over a dense `&[f64]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SortedPointSet {
    values: Vec<f64>,
    rationals: Vec<Option<Rational>>,
}

impl SortedPointSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from points in any order; equal values keep their input order.
    pub fn from_points<I: IntoIterator<Item = UnitPoint>>(points: I) -> Self {
        let mut pts: Vec<UnitPoint> = points.into_iter().collect();
        pts.sort_by(|a, b| a.value.total_cmp(&b.value));
        Self {
            values: pts.iter().map(|p| p.value).collect(),
            rationals: pts.iter().map(|p| p.rational).collect(),
        }
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        let pts = values.iter().map(|&v| UnitPoint::new(v)).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_points(pts))
    }

    /// The starting configuration `{1/3, 1/2}` used for the reference runs.
    pub fn default_seed() -> Self {
        Self::from_points([
            UnitPoint::from_ratio(1, 3).expect("valid"),
            UnitPoint::from_ratio(1, 2).expect("valid"),
        ])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<UnitPoint> {
        Some(UnitPoint {
            value: *self.values.get(i)?,
            rational: self.rationals[i],
        })
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = UnitPoint> + '_ {
        self.values
            .iter()
            .zip(&self.rationals)
            .map(|(&value, &rational)| UnitPoint { value, rational })
    }

    /// Number of points `<= x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.values.partition_point(|&v| v <= x)
    }

    /// Returns a copy with `p` inserted after any equal values.
    pub fn insert(&self, p: UnitPoint) -> Self {
        let mut out = self.clone();
        out.insert_in_place(p);
        out
    }

    /// Inserts `p` after any equal values and returns its index.
    pub fn insert_in_place(&mut self, p: UnitPoint) -> usize {
        let idx = self.count_le(p.value);
        self.values.insert(idx, p.value);
        self.rationals.insert(idx, p.rational);
        idx
    }

    /// Parses the plain-text point format: one value per line, an optional
    /// `num/den` second column, `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let mut cols = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty());
            let value: f64 = cols
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|e| parse_err(format!("bad value: {e}")))?;
            let point = match cols.next() {
                None => UnitPoint::new(value),
                Some(frac) => {
                    let (num, den) = frac
                        .split_once('/')
                        .ok_or_else(|| parse_err(format!("expected num/den, got {frac:?}")))?;
                    let num = num.parse().map_err(|e| parse_err(format!("bad numerator: {e}")))?;
                    let den = den.parse().map_err(|e| parse_err(format!("bad denominator: {e}")))?;
                    Rational::new(num, den).and_then(|r| UnitPoint::with_rational(value, r))
                }
            }
            .map_err(|e| parse_err(e.to_string()))?;
            if cols.next().is_some() {
                return Err(parse_err("too many columns".into()));
            }
            pts.push(point);
        }
        Ok(Self::from_points(pts))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for SortedPointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.iter() {
            match p.rational {
                Some(r) => writeln!(f, "{} {}", format_real(p.value), r)?,
                None => writeln!(f, "{}", format_real(p.value))?,
            }
        }
        Ok(())
    }
}

/// Formats a float with 17 significant digits, in plain decimal where that
/// stays readable.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0.0000000000000000".to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..15).contains(&mag) {
        format!("{:.*}", (16 - mag) as usize, v)
    } else {
        format!("{v:.16e}")
    }
}

/// Transport energy `Σ |x_(i) − target(i)|` with compensated summation.
pub fn energy(ps: &SortedPointSet, grid: TargetGrid) -> Result<f64> {
    if ps.is_empty() {
        return Err(Error::arg("energy of an empty point set"));
    }
    if grid.n != ps.len() {
        return Err(Error::arg(format!(
            "grid size {} does not match point count {}",
            grid.n,
            ps.len()
        )));
    }
    let mut acc = NeumaierSum::new();
    for (i, &x) in ps.values().iter().enumerate() {
        acc.add((x - grid.target(i + 1)).abs());
    }
    Ok(acc.value())
}

/// Energy against the grid of matching size.
pub fn energy_of(ps: &SortedPointSet, kind: GridKind) -> Result<f64> {
    energy(ps, TargetGrid::new(kind, ps.len()))
}

/// Minimum over all matchings of points to grid slots, by exhaustive
/// enumeration. Only meant as a cross-check for tiny inputs.
pub fn energy_permutation_oracle(points: &[UnitPoint], grid: TargetGrid) -> Result<f64> {
    if points.len() > PERMUTATION_ORACLE_LIMIT {
        return Err(Error::arg(format!(
            "permutation oracle refuses {} points (limit {PERMUTATION_ORACLE_LIMIT})",
            points.len()
        )));
    }
    if points.is_empty() || grid.n != points.len() {
        return Err(Error::arg("permutation oracle needs a non-empty set matching the grid"));
    }
    let mut perm: Vec<usize> = (0..points.len()).collect();
    let cost = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(slot, &p)| (points[p].value - grid.target(slot + 1)).abs())
            .sum()
    };
    let mut best = cost(&perm);
    // Heap's algorithm, iterative form.
    let n = perm.len();
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}
