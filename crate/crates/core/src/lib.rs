//! Squared-error risk of missing-mass estimators.
//!
//! The missing mass of a sample `X^n` drawn i.i.d. from `p` is the total
//! probability of the symbols that never appear in it. This crate computes
//! the risk `E[(M̂0 - M0)^2]` of estimators for it, centrally the
//! Good-Turing estimator `Φ1/n`:
//!
//! * [`dist`]: finite distributions, the uniform / `P_c` / Zipf families and
//!   seeded sampling.
//! * [`estimators`]: occupancy profiles, Good-Turing and the Dirichlet
//!   posterior-mean estimator.
//! * [`risk`]: exact and asymptotic Good-Turing risk, the worst-case uniform
//!   coefficient, brute-force oracles and the moment inequalities behind them.
//! * [`bounds`]: minimax lower bounds (Dirichlet prior Bayes risk, Bernoulli
//!   reduction) and the final bracket.
//! * [`montecarlo`]: a deterministic parallel simulation engine.

pub mod bounds;
pub mod dist;
mod error;
pub mod estimators;
pub mod montecarlo;
pub mod numeric;
pub mod risk;

pub use bounds::{BoundMethod, BoundReport, DirichletSpec};
pub use dist::{DistSpec, Distribution, Sample, Sampler, SymbolCounts};
pub use error::{Error, Result};
pub use estimators::{Estimator, EstimatorSpec, OccupancyProfile};
pub use montecarlo::{RunningStats, SimConfig, SweepAxis};
pub use risk::{RiskMethod, RiskReport};
