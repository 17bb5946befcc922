//! Empirical Bayes shrinkage prediction under asymmetric check loss.
//!
//! Coordinates follow `X ~ N(theta, sigma_p)` (observed past) and
//! `Y ~ N(theta, sigma_f)` (future), and a prediction `q` pays
//! `b (Y - q)^+ + h (q - Y)^+`. The crate provides the closed-form loss and
//! risk of the normal-prior Bayes rule, the asymptotic risk estimate (ARE)
//! used to tune the prior hyperparameters from data alone, the classical
//! likelihood and moment competitors, oracle selectors and a simulation
//! harness.
//!
//! The crate is `no_std` and needs only `alloc`. IO, the CLI and parallel
//! execution live in the `checkshrink` companion crate.

#![no_std]
#![forbid(unsafe_code)]
// NaN-rejecting guards read as `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod are;
pub mod check_loss;
pub mod competitors;
pub mod error;
pub mod experiments;
pub mod grids;
pub mod rng;
pub mod stats;

#[cfg(test)]
mod properties;

pub use are::{AreEvaluator, AreTuning, TuningConfig};
pub use check_loss::{ClassTag, CoordParams, HyperParams, ProblemInstance, Tau, TruthInstance};
pub use competitors::{Method, SelectionResult};
pub use error::{Error, Result};
pub use grids::Grid;
pub use rng::RngSeed;
