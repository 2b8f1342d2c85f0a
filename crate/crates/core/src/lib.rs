//! Entropic optimal transport between continuous distributions, estimated
//! from streaming samples.
//!
//! The crate implements two solvers and the analysis machinery around them:
//!
//! * [`online::run_online_sinkhorn`] — stochastic Sinkhorn iterations that
//!   consume fresh sample batches and represent the dual potentials as
//!   growing weighted atom sets in the log domain.
//! * [`compressed::run_compressed`] — the same iteration with periodic
//!   measure compression (Gaussian quadrature in 1D, Fourier moment
//!   matching in any dimension) that bounds the support growth.
//! * [`discrete`] — classical log-domain Sinkhorn on fixed empirical
//!   measures, used as the correctness oracle and reference-value source.
//! * [`analysis`] — closed-form convergence-rate and complexity-exponent
//!   calculators plus log-log slope fitting for benchmark traces.
//!
//! All randomness flows through [`sampling::RngState`]; a fixed seed
//! reproduces every trace bit for bit.

pub mod analysis;
pub mod compress;
pub mod compressed;
pub mod cost;
pub mod discrete;
mod error;
pub mod grid;
pub mod online;
pub mod potential;
pub mod sampling;
pub mod schedule;
pub mod transform;

pub use compress::{FrequencySet, WeightedMeasure};
pub use cost::{CostKind, CostSpec};
pub use error::{Error, Result};
pub use grid::Points;
pub use online::{Budget, Trace, TraceRow};
pub use potential::{DualPair, Potential};
pub use sampling::{DistributionSpec, RngState};
pub use schedule::Schedule;
