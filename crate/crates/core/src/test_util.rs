//! Random instances and schedules shared by unit tests.

use std::collections::BTreeMap;

use rand::Rng;

use crate::model::{ComputeGraph, Instance, Schedule, TaskGraph};

/// Draws an instance with positive demands/speeds and zero-diagonal comm.
/// With `ensure_edge` the edge set is never empty (requires `n_tasks >= 2`).
pub fn random_instance(
    rng: &mut impl Rng,
    n_tasks: usize,
    n_machines: usize,
    edge_prob: f64,
    ensure_edge: bool,
) -> Instance {
    let compute: Vec<f64> = (0..n_tasks).map(|_| rng.gen_range(0.1..5.0)).collect();
    let speed: Vec<f64> = (0..n_machines).map(|_| rng.gen_range(0.2..4.0)).collect();
    let mut comm = vec![vec![0.0; n_machines]; n_machines];
    for j in 0..n_machines {
        for k in 0..n_machines {
            if j != k {
                comm[j][k] = rng.gen_range(0.0..3.0);
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..n_tasks {
        for j in 0..n_tasks {
            if i != j && rng.gen_bool(edge_prob) {
                edges.push((i, j));
            }
        }
    }
    if ensure_edge && edges.is_empty() {
        assert!(n_tasks >= 2, "cannot place an edge on a single task");
        edges.push((0, 1));
    }
    Instance {
        task_graph: TaskGraph { compute, edges },
        compute_graph: ComputeGraph { speed, comm },
        metadata: BTreeMap::new(),
    }
}

pub fn random_schedule(rng: &mut impl Rng, instance: &Instance) -> Schedule {
    let assignment = (0..instance.n_tasks())
        .map(|_| rng.gen_range(0..instance.n_machines()))
        .collect();
    Schedule::new(assignment, instance.n_machines()).unwrap()
}
