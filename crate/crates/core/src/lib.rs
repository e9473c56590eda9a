//! Simulation and mean-field analysis of the biased random graph processes
//! `Or(K)` and `And(K)`.
//!
//! * [`tracker`] keeps exact component statistics under edge insertion.
//! * [`process`] samples the processes edge by edge.
//! * [`ode`] solves the mean-field equations and locates the susceptibility
//!   blow-up.
//! * [`harness`] runs the Monte Carlo experiments and writes their results.

pub mod error;
pub mod harness;
pub mod ode;
pub mod process;
pub mod tracker;

pub use error::{Error, Result};
pub use process::{
    CategoryCensus, ModelKind, ModelSpec, ProcessState, Sampling, StepOutcome, StopCondition,
};
pub use tracker::{ComponentTracker, Snapshot};
