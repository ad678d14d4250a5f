//! Optimal receiver-side corrections for qubit teleportation.
//!
//! Given a shared two-qubit resource state and an arbitrary four-dimensional
//! POVM on the sender's side, this crate finds the completely positive
//! trace-preserving correction map the receiver should apply to each
//! measurement outcome so that the average teleportation fidelity over
//! uniformly distributed pure inputs is maximal.
//!
//! The main entry point is [`optimizer::optimize_scenario`], which runs an
//! iterative fixed-point search per outcome, cross-checks it against a
//! derivative-free search over extremal channels, and reports the resulting
//! channels together with convergence and complete-positivity diagnostics.
//! [`analytic`] carries the closed-form reference values available for the
//! built-in one-parameter measurement family, and [`fidelity`] provides a
//! Monte-Carlo estimator that validates every optimized protocol end to end.

pub mod analytic;
pub mod channels;
pub mod error;
pub mod fidelity;
pub mod linalg;
pub mod optimizer;
pub mod scenario;

pub use error::{Error, Result};
pub use linalg::{BlochVector, QOperator};
