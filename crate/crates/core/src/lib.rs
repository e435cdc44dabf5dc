//! Scheduling of iterative task graphs onto heterogeneous networked machines.
//!
//! The objective throughout is the per-iteration bottleneck: the slowest
//! task's compute time (machines split their speed across co-located tasks)
//! plus the worst outgoing transfer delay. [`model`] holds the problem types,
//! [`evaluator`] scores schedules, [`qcqp`] builds the quadratic forms of the
//! assignment problem, [`sdp`] solves its semidefinite relaxation, and
//! [`rounding`] turns relaxed solutions back into schedules. [`baselines`]
//! provides list-scheduling and exhaustive references, [`sim`] generates
//! benchmark instances.

pub mod baselines;
pub mod error;
pub mod evaluator;
pub mod model;
pub mod qcqp;
pub mod rounding;
pub mod sdp;
pub mod sim;
#[cfg(test)]
pub(crate) mod test_util;

pub use error::Error;
pub use model::{ComputeGraph, Instance, Schedule, TaskGraph};
