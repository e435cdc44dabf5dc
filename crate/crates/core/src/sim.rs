//! Instance generators and the iterative-process cost model.
//!
//! Generators are pure functions of their parameters and a seed. Draws
//! happen in a fixed order (demands, then speeds, then delays row by row,
//! then per-vertex degrees and successor sets), so a seed pins an instance
//! bit for bit across runs and platforms.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Error;
use crate::evaluator;
use crate::model::{ComputeGraph, Instance, Schedule, TaskGraph};

/// Out-degree band used by [`Profile::HalfNormal`].
pub const DEFAULT_DEGREE_BAND: (usize, usize) = (2, 3);

/// Random-instance family for [`gen_random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Half-normal magnitudes: demands `|N(0,1)|`, speeds `|N(0,sqrt(15))|`,
    /// delays `|N(0,sqrt(10))|`, out-degrees in [`DEFAULT_DEGREE_BAND`].
    /// The scale parameters follow common experimental settings for this
    /// problem family; magnitudes are taken because negative demands,
    /// speeds or delays are physically meaningless.
    HalfNormal,
    /// Same magnitude draws with an explicit inclusive out-degree band.
    DegreeBand { lo: usize, hi: usize },
}

impl Profile {
    fn band(self) -> (usize, usize) {
        match self {
            Profile::HalfNormal => DEFAULT_DEGREE_BAND,
            Profile::DegreeBand { lo, hi } => (lo, hi),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Profile::HalfNormal => "half-normal",
            Profile::DegreeBand { .. } => "degree-band",
        }
    }
}

/// Per-vertex successor sets: draw an out-degree from the band, then that
/// many distinct targets uniformly among the other vertices.
fn draw_edges(
    rng: &mut ChaCha12Rng,
    n_tasks: usize,
    lo: usize,
    hi: usize,
) -> Result<Vec<(usize, usize)>, Error> {
    if lo > hi {
        return Err(Error::InvalidParameter(format!(
            "degree band is empty ({lo} > {hi})"
        )));
    }
    if hi >= n_tasks {
        return Err(Error::InvalidParameter(format!(
            "degree bound {hi} needs more than {n_tasks} vertices"
        )));
    }
    let mut edges = Vec::new();
    for i in 0..n_tasks {
        let degree = rng.gen_range(lo..=hi);
        let mut candidates: Vec<usize> = (0..n_tasks).filter(|&j| j != i).collect();
        for k in 0..degree {
            let pick = rng.gen_range(k..candidates.len());
            candidates.swap(k, pick);
            edges.push((i, candidates[k]));
        }
    }
    Ok(edges)
}

fn stamp(instance: &mut Instance, profile: &str, lo: usize, hi: usize, seed: u64) {
    let meta: &mut BTreeMap<String, String> = &mut instance.metadata;
    meta.insert("profile".into(), profile.into());
    meta.insert("degree_lo".into(), lo.to_string());
    meta.insert("degree_hi".into(), hi.to_string());
    meta.insert("seed".into(), seed.to_string());
}

/// Draws a random instance. See [`Profile`] for the two families.
pub fn gen_random(
    n_tasks: usize,
    n_machines: usize,
    seed: u64,
    profile: Profile,
) -> Result<Instance, Error> {
    if n_tasks == 0 || n_machines == 0 {
        return Err(Error::InvalidParameter("sizes must be at least 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let demand_dist = Normal::new(0.0, 1.0).unwrap();
    let speed_dist = Normal::new(0.0, 15f64.sqrt()).unwrap();
    let delay_dist = Normal::new(0.0, 10f64.sqrt()).unwrap();

    let compute: Vec<f64> = (0..n_tasks)
        .map(|_| f64::abs(demand_dist.sample(&mut rng)))
        .collect();
    let speed: Vec<f64> = (0..n_machines)
        .map(|_| f64::abs(speed_dist.sample(&mut rng)))
        .collect();
    let mut comm = vec![vec![0.0; n_machines]; n_machines];
    for (j, row) in comm.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            if j != k {
                *cell = f64::abs(delay_dist.sample(&mut rng));
            }
        }
    }
    let (lo, hi) = profile.band();
    let edges = draw_edges(&mut rng, n_tasks, lo, hi)?;

    let mut instance = Instance {
        task_graph: TaskGraph { compute, edges },
        compute_graph: ComputeGraph { speed, comm },
        metadata: BTreeMap::new(),
    };
    stamp(&mut instance, profile.name(), lo, hi, seed);
    Ok(instance)
}

/// Gossip-style federated-learning workload: every user trains on an even
/// share of the data (equal unit demands), pushes parameters to 6 or 7
/// random peers per round, and the machines are identical with link delays
/// uniform in [0, 1).
pub fn gen_gossip_fl(n_users: usize, n_machines: usize, seed: u64) -> Result<Instance, Error> {
    if n_machines == 0 {
        return Err(Error::InvalidParameter("sizes must be at least 1".into()));
    }
    if n_users < 8 {
        return Err(Error::InvalidParameter(format!(
            "gossip degree band (6, 7) needs at least 8 users, got {n_users}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let compute = vec![1.0; n_users];
    let speed = vec![1.0; n_machines];
    let mut comm = vec![vec![0.0; n_machines]; n_machines];
    for (j, row) in comm.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            if j != k {
                *cell = rng.gen_range(0.0..1.0);
            }
        }
    }
    let edges = draw_edges(&mut rng, n_users, 6, 7)?;
    let mut instance = Instance {
        task_graph: TaskGraph { compute, edges },
        compute_graph: ComputeGraph { speed, comm },
        metadata: BTreeMap::new(),
    };
    stamp(&mut instance, "gossip-fl", 6, 7, seed);
    Ok(instance)
}

/// Pilot-phase demand estimation: time each task on one machine, then
/// multiply the measured time back by the machine's speed. Measurement
/// noise is multiplicative and uniform in `+-noise_fraction`, so
/// `p_hat = p * (1 + eps)` and the speed cancels exactly at `eps = 0`.
pub fn pilot_estimate(
    true_p: &[f64],
    machine_speed: f64,
    noise_fraction: f64,
    seed: u64,
) -> Vec<f64> {
    assert!(
        (0.0..1.0).contains(&noise_fraction),
        "noise fraction must lie in [0, 1)"
    );
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    true_p
        .iter()
        .map(|&p| {
            let measured = p / machine_speed;
            let eps = if noise_fraction > 0.0 {
                rng.gen_range(-noise_fraction..noise_fraction)
            } else {
                0.0
            };
            measured * (1.0 + eps) * machine_speed
        })
        .collect()
}

/// Total time of `n_iter` rounds under a static schedule with stationary
/// costs: the per-round bottleneck just accumulates.
pub fn run_iterations(instance: &Instance, schedule: &Schedule, n_iter: u64) -> f64 {
    assert!(n_iter >= 1, "at least one iteration");
    n_iter as f64 * evaluator::bottleneck(instance, schedule)
}
