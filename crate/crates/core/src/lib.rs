//! Greedy energy-minimising online sampling on the unit interval.
//!
//! Given points `x_1, …, x_n ∈ [0,1]`, each new point is the global minimiser
//! of the transport energy `Σ |x_(i) − i/(n+1)|` of the augmented set, found in
//! O(n). General targets on the real line are handled by mapping through the
//! target CDF. The crate also ships exact one-dimensional discrepancy metrics,
//! the classical comparison sequences, a first-order placement predictor, a
//! numerical analyzer for the continuous (mean-field) version of the energy,
//! and a reproducible benchmark harness.

pub mod baselines;
pub mod error;
pub mod experiments;
pub mod greedy;
pub mod heuristics;
pub mod mean_field;
pub mod metrics;
pub mod numeric;
pub mod point_set;
pub mod targets;

pub use error::{Error, Result};
pub use greedy::{extend, next_point, EnergyTrace, GreedySequence, GreedyStepResult, TraceEntry};
pub use metrics::DiscrepancyReport;
pub use point_set::{energy, energy_of, GridKind, Rational, SortedPointSet, TargetGrid, UnitPoint};
pub use targets::{DistributionSpec, TargetDistribution};
