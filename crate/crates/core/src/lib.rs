#![no_std]

//! Decision-focused optimal transport.
//!
//! Distances between distributions of linear-program cost vectors, measured by
//! the regret (SPO loss) of acting on one cost vector when another is realized.
//! The crate covers:
//!
//! - [`polytope`]: the feasible region in V-representation, its linear
//!   optimization oracle, the value function and the SPO loss.
//! - [`measures`]: discrete measures, oracle push-forwards and the weight-vector
//!   baselines (TV, KL).
//! - [`transport`]: an exact transportation simplex with dual potentials and a
//!   log-domain Sinkhorn solver.
//! - [`dfdist`]: optimistic, robust, independent, symmetric and entropic
//!   decision-focused distances, the quadratic reduction, coupling lifts and
//!   dual certificates.
//! - [`interpolate`]: coupling-induced interpolants and the reduced-space
//!   displacement interpolation.
//! - [`experiments`]: newsvendor mixtures, subsampling error sweeps and the
//!   telemonitoring pipeline (record-level; file parsing lives elsewhere).
//!
//! Everything here is `no_std` with `alloc`; IO is left to callers.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dfdist;
mod error;
pub mod experiments;
pub mod interpolate;
pub mod matrix;
pub mod measures;
pub mod polytope;
pub mod stats;
pub mod transport;
pub mod vecops;

pub use crate::dfdist::{DfMethod, DfResult, DualPotentials, Mode};
pub use crate::error::{Error, Result};
pub use crate::matrix::Matrix;
pub use crate::measures::{DiscreteMeasure, PushforwardMeasure};
pub use crate::polytope::{CostVector, FeasibleRegion};
pub use crate::transport::{CostMatrix, Coupling, Direction, TransportResult};
