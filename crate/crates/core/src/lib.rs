//! Primes in the intervals `(m*p_n, m*p_{n+1})` between scaled consecutive
//! primes, for rational `1 < m <= 2` (`m = 2` being the doubled-gap case).
//!
//! - [`sieve`]: segmented sieve, exact `pi(x)` at rational arguments.
//! - [`intervals`]: per-interval prime counts.
//! - [`classify`]: R / L / RL classification by two independent routes,
//!   the R, L, RL and A_i sequences, and the interleaving and per-interval
//!   structure checks.
//! - [`model`]: the geometric heuristic, the Cramér random set and gap
//!   ratio statistics.
//! - [`stats`]: densities with Wilson intervals, RL estimators, geometric
//!   fit and block densities.
//! - [`analysis`] / [`cli`]: drivers and the command-line surface.
//!
//! Model and statistics code is generic over [`Real`] (`f32`/`f64`); the
//! `*64` aliases below fix the common double-precision instantiation.

pub mod analysis;
pub mod classify;
pub mod cli;
pub mod error;
pub mod intervals;
pub mod model;
pub mod rational;
pub mod scalar;
pub mod sieve;
pub mod stats;

pub use classify::{PrimeClass, SequenceBundle};
pub use error::{Error, Result};
pub use intervals::IntervalRecord;
pub use model::PseudoprimeTable;
pub use rational::{Multiplier, Rational};
pub use scalar::Real;
pub use sieve::PrimeTable;

pub type ModelParams64 = model::ModelParams<f64>;
pub type ModelParams32 = model::ModelParams<f32>;
pub type GapStats64 = model::GapStats<f64>;
pub type DensityEstimate64 = stats::DensityEstimate<f64>;
pub type DensityEstimate32 = stats::DensityEstimate<f32>;
pub type MeanEstimate64 = stats::MeanEstimate<f64>;
pub type FitReport64 = stats::FitReport<f64>;
