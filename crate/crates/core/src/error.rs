//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Instance JSON could not be parsed; the message names the offending field.
    #[error("parse error: {0}")]
    Parse(String),

    /// A structurally invalid instance was passed where a valid one is required.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A schedule references a machine outside the instance's range.
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// The task graph has no edges: bottleneck objective has no quadratic constraints.
    #[error("no edges: bottleneck objective has no quadratic constraints")]
    NoEdges,

    /// A matrix that must be positive semidefinite has a significantly negative eigenvalue.
    #[error("covariance is not PSD: smallest eigenvalue {0:e}")]
    NotPsd(f64),

    /// A correlation entry strayed outside [-1, 1] beyond tolerance.
    #[error("covariance out of range: entry ({row}, {col}) = {value}")]
    CovarianceOutOfRange { row: usize, col: usize, value: f64 },

    /// The sorted greedy pairing only applies to communication-free, edge-free
    /// instances with at most as many tasks as machines.
    #[error("greedy pairing preconditions not met: {0}")]
    GreedyPreconditions(String),

    /// Exhaustive search would enumerate more schedules than the caller allowed.
    #[error("exhaustive search needs {required} evaluations, limit is {limit}")]
    BruteForceLimit { required: u128, limit: u128 },

    /// The SDP solver could not produce a usable iterate.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A generator or config parameter is out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
