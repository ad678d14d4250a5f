//! Sweep, verification and report machinery behind the `telecp` binary.

pub mod config;
pub mod sweep;
pub mod verify;

pub use sweep::{csv_from_rows, run_sweep, SweepConfig, SweepRow};
pub use verify::{run_all_criteria, CriterionResult, VerifyConfig};
