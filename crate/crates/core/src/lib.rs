//! Metropolis-adjusted microcanonical sampling.
//!
//! The sampler moves on the product of the target's support and the unit
//! velocity sphere with energy-preserving isokinetic dynamics, corrects the
//! integration error with a Metropolis step on the accumulated energy error,
//! and tunes its step size, preconditioner and trajectory length
//! automatically. A plain HMC kernel with the same machinery serves as the
//! baseline, and [`harness`] runs seeded multi-chain experiments.

pub mod adaptation;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod harness;
pub mod hmc;
pub mod kernel;
pub mod langevin;
pub mod models;
pub mod proposal;
pub mod schedule;
pub mod target;

pub use adaptation::{run_tuning, DualAveraging, TunedConfig, TuningResult, TuningSchedule};
pub use diagnostics::{b_squared, gradients_to_threshold, tau_int, BiasCurve, MomentTracker, Reduction};
pub use dynamics::{ChainState, Flavor, PhasePoint};
pub use error::{Error, Result};
pub use kernel::{Chain, ChainStats, KernelConfig, Sampler};
pub use models::{ExactSampler, Model, ModelSpec};
pub use proposal::{ProposalOutcome, StepInfo};
pub use schedule::{SequenceKind, TrajectorySchedule};
pub use target::{CountingTarget, GroundTruth, Observable, Preconditioned, Target};
