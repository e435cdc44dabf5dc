//! Scoring of schedules under the bottleneck objective.
//!
//! A machine divides its speed evenly-by-demand across the tasks placed on
//! it, so every task on machine `l` finishes its compute phase at
//! `(sum of demands on l) / speed[l]`. After computing, a task ships its
//! result to each successor; transfers to co-located successors are free and
//! transfers run in parallel, so the communicate phase costs the worst
//! outgoing link delay. One iteration ends when the slowest task has done
//! both, which is the quantity every scheduler here tries to minimize.

use crate::model::{Instance, Schedule};

/// Compute time of `task`: the shared load of its machine divided by speed.
pub fn compute_time(instance: &Instance, schedule: &Schedule, task: usize) -> f64 {
    let machine = schedule.machine_of(task);
    let load: f64 = instance
        .task_graph
        .compute
        .iter()
        .enumerate()
        .filter(|(other, _)| schedule.machine_of(*other) == machine)
        .map(|(_, &p)| p)
        .sum();
    load / instance.compute_graph.speed[machine]
}

/// Communication time of `task`: worst delay to any successor's machine,
/// zero when the task has no successors.
pub fn comm_time(instance: &Instance, schedule: &Schedule, task: usize) -> f64 {
    let from = schedule.machine_of(task);
    instance
        .task_graph
        .successors(task)
        .map(|succ| instance.compute_graph.comm[from][schedule.machine_of(succ)])
        .fold(0.0, f64::max)
}

/// Per-iteration bottleneck: the slowest task's compute + communicate time.
pub fn bottleneck(instance: &Instance, schedule: &Schedule) -> f64 {
    debug_assert_eq!(schedule.n_tasks(), instance.n_tasks());
    debug_assert_eq!(schedule.n_machines(), instance.n_machines());
    (0..instance.n_tasks())
        .map(|i| compute_time(instance, schedule, i) + comm_time(instance, schedule, i))
        .fold(0.0, f64::max)
}
