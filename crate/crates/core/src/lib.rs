//! Single-index compressed sensing under non-Gaussian measurements.
//!
//! The estimator projects `v̂ = (1/m) Σ yᵢ aᵢ` onto a constraint set and
//! targets `λx`. Its penalty `α` is controlled by how far the sensing law
//! is from Gaussian, measured through the zero-bias transform (`γ_a`), the
//! Stein coefficient (`E|1 - T|`) and total variation. This crate computes
//! those measures, the population quantities, the estimator, Gaussian mean
//! widths and an experiment harness that checks the resulting bounds.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contamination;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod link_model;
pub mod quad;
pub mod recovery;
pub mod rng;
pub mod special;
pub mod zero_bias;

pub use contamination::{BoundKind, BoundSet, ContaminationMode, ContaminationModel};
pub use distributions::{DistributionSpec, Kind, Law, MomentReport, StandardizedDistribution};
pub use error::{Error, Result};
pub use geometry::WidthEstimate;
pub use harness::{ExperimentConfig, TrialRow};
pub use link_model::{Channel, LinkFunction, PopulationSummary, SensingModel};
pub use recovery::{ConstraintSet, Dataset};
pub use zero_bias::{DiscrepancyReport, ZeroBiasLaw};
