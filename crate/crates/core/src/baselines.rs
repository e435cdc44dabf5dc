//! Comparator schedulers and exact oracles: list scheduling on a DAG view
//! of the task graph, nearest-integer recovery from the relaxation, sorted
//! greedy pairing for the communication-free case, and exhaustive search.

use crate::error::Error;
use crate::evaluator;
use crate::model::{Instance, Schedule, TaskGraph};
use crate::sdp::SdpSolution;

/// Default cap on exhaustive-search size (number of schedules evaluated).
pub const DEFAULT_BRUTE_FORCE_LIMIT: u128 = 10_000_000;

/// One edge of the DAG view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DagEdge {
    pub from: usize,
    pub to: usize,
}

/// Acyclic single-entry view of a (possibly cyclic) task graph, the input
/// format list schedulers expect.
///
/// Vertex layout: `0..n_tasks` are the original tasks, then the entry vertex
/// `S`, then one relay vertex per original edge, then the exit vertex `D`.
/// `S`, `D` and the relays carry zero compute demand. Every original edge
/// contributes three list entries: a task-to-task copy (redirected to the
/// edge's relay when it would close a cycle), a task-to-relay edge, and a
/// relay-to-exit edge; `S` fans out to every task. The list may therefore
/// contain duplicates, and the counts are exactly
/// `n_vertices = n_tasks + n_edges + 2` and `edges.len() = 3·n_edges + n_tasks`.
/// When every task has an outgoing edge, `D` is the unique exit.
#[derive(Debug, Clone)]
pub struct DagView {
    pub n_tasks: usize,
    /// Compute demand per vertex; zero outside `0..n_tasks`.
    pub demand: Vec<f64>,
    pub edges: Vec<DagEdge>,
    /// Delay multiplier per entry of `edges`: real data movements carry 1,
    /// purely structural edges (through the entry and exit vertices) carry 0.
    pub transfer: Vec<f64>,
    pub source: usize,
    pub sink: usize,
}

impl DagView {
    pub fn n_vertices(&self) -> usize {
        self.demand.len()
    }

    /// Deterministic topological order (lowest-index-first among ready
    /// vertices), or `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n_vertices();
        let mut in_degree = vec![0usize; n];
        for e in &self.edges {
            in_degree[e.to] += 1;
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: Vec<usize> = (0..n).filter(|&v| in_degree[v] == 0).collect();
        while let Some(&v) = ready.iter().min() {
            ready.retain(|&w| w != v);
            order.push(v);
            for e in &self.edges {
                if e.from == v {
                    in_degree[e.to] -= 1;
                    if in_degree[e.to] == 0 {
                        ready.push(e.to);
                    }
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// Builds the DAG view of a task graph.
///
/// Task-to-task copies are added in the task graph's edge order; a copy that
/// would close a cycle among the task vertices is redirected to that edge's
/// relay vertex instead, so the output is acyclic for every input.
pub fn dag_convert(task_graph: &TaskGraph) -> DagView {
    let n_tasks = task_graph.n_tasks();
    let n_edges = task_graph.edges.len();
    let source = n_tasks;
    let relay = |k: usize| n_tasks + 1 + k;
    let sink = n_tasks + 1 + n_edges;

    let mut demand = vec![0.0; n_tasks + n_edges + 2];
    demand[..n_tasks].copy_from_slice(&task_graph.compute);

    let mut edges = Vec::with_capacity(3 * n_edges + n_tasks);
    let mut transfer = Vec::with_capacity(3 * n_edges + n_tasks);

    // Reachability among task vertices over the copies added so far; used to
    // detect when a copy would close a cycle.
    let mut copies: Vec<(usize, usize)> = Vec::new();
    let reaches = |copies: &[(usize, usize)], from: usize, to: usize| -> bool {
        let mut stack = vec![from];
        let mut seen = vec![false; n_tasks];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            if seen[v] {
                continue;
            }
            seen[v] = true;
            stack.extend(copies.iter().filter(|&&(a, _)| a == v).map(|&(_, b)| b));
        }
        false
    };
    for (k, &(i, j)) in task_graph.edges.iter().enumerate() {
        if reaches(&copies, j, i) {
            edges.push(DagEdge { from: i, to: relay(k) });
        } else {
            copies.push((i, j));
            edges.push(DagEdge { from: i, to: j });
        }
        transfer.push(1.0);
    }
    for i in 0..n_tasks {
        edges.push(DagEdge { from: source, to: i });
        transfer.push(0.0);
    }
    for (k, &(i, _)) in task_graph.edges.iter().enumerate() {
        edges.push(DagEdge { from: i, to: relay(k) });
        transfer.push(1.0);
    }
    for k in 0..n_edges {
        edges.push(DagEdge { from: relay(k), to: sink });
        transfer.push(0.0);
    }

    DagView { n_tasks, demand, edges, transfer, source, sink }
}

/// Upward ranks (mean execution plus worst mean-delay successor chain) and
/// the scheduling order: rank descending, topological position ascending on
/// ties. The tie-break keeps the order topologically valid, since zero-weight
/// chains (through the entry vertex in particular) produce exact rank ties.
fn rank_order(instance: &Instance, dag: &DagView) -> Vec<usize> {
    let n = dag.n_vertices();
    let n_m = instance.compute_graph.speed.len();
    let mean_inv_speed =
        instance.compute_graph.speed.iter().map(|e| 1.0 / e).sum::<f64>() / n_m as f64;
    let mean_delay = if n_m < 2 {
        0.0
    } else {
        let mut sum = 0.0;
        for k in 0..n_m {
            for l in 0..n_m {
                if k != l {
                    sum += instance.compute_graph.comm[k][l];
                }
            }
        }
        sum / (n_m * (n_m - 1)) as f64
    };

    let topo = dag.topological_order().expect("DAG view must be acyclic");
    let mut topo_pos = vec![0usize; n];
    for (pos, &v) in topo.iter().enumerate() {
        topo_pos[v] = pos;
    }
    let mut rank = vec![0.0f64; n];
    for &v in topo.iter().rev() {
        let mut tail: f64 = 0.0;
        for (e, &w) in dag.edges.iter().zip(&dag.transfer) {
            if e.from == v {
                tail = tail.max(w * mean_delay + rank[e.to]);
            }
        }
        rank[v] = dag.demand[v] * mean_inv_speed + tail;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rank[b].total_cmp(&rank[a]).then(topo_pos[a].cmp(&topo_pos[b])));
    order
}

/// Earliest start of a job of length `len` on a machine with the given busy
/// intervals (sorted, disjoint), not before `ready`.
fn earliest_slot(busy: &[(f64, f64)], ready: f64, len: f64) -> f64 {
    let mut t = ready;
    for &(s, e) in busy {
        if t + len <= s {
            return t;
        }
        t = t.max(e);
    }
    t
}

/// List scheduler: upward-rank priority, then per vertex the machine with
/// the earliest finish time, allowing insertion into idle gaps. Entry, exit
/// and relay vertices are scheduled like everything else but their machine
/// choices are discarded; the returned schedule covers the original tasks.
pub fn heft(instance: &Instance, dag: &DagView) -> Schedule {
    let n_m = instance.compute_graph.speed.len();
    let n = dag.n_vertices();
    let order = rank_order(instance, dag);

    let mut preds: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (e, &w) in dag.edges.iter().zip(&dag.transfer) {
        preds[e.to].push((e.from, w));
    }

    let mut machine = vec![0usize; n];
    let mut finish = vec![0.0f64; n];
    let mut busy: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_m];
    for &v in &order {
        let mut best: Option<(f64, usize, f64)> = None;
        for l in 0..n_m {
            let exec = dag.demand[v] / instance.compute_graph.speed[l];
            let mut ready: f64 = 0.0;
            for &(a, w) in &preds[v] {
                let delay = if machine[a] == l {
                    0.0
                } else {
                    w * instance.compute_graph.comm[machine[a]][l]
                };
                ready = ready.max(finish[a] + delay);
            }
            let start = earliest_slot(&busy[l], ready, exec);
            let eft = start + exec;
            if best.map_or(true, |(b, _, _)| eft < b) {
                best = Some((eft, l, start));
            }
        }
        let (eft, l, start) = best.expect("at least one machine");
        machine[v] = l;
        finish[v] = eft;
        if eft > start {
            let at = busy[l].partition_point(|iv| iv.0 < start);
            busy[l].insert(at, (start, eft));
        }
    }
    Schedule::new(machine[..dag.n_tasks].to_vec(), n_m).expect("machines are in range")
}

/// Bottleneck over the placed subset of tasks: shared-load compute plus
/// worst delay toward placed successors.
fn partial_bottleneck(instance: &Instance, placed: &[Option<usize>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &m) in placed.iter().enumerate() {
        let Some(mi) = m else { continue };
        let load: f64 = placed
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r == Some(mi))
            .map(|(r, _)| instance.task_graph.compute[r])
            .sum();
        let mut delay: f64 = 0.0;
        for &(a, b) in &instance.task_graph.edges {
            if a == i {
                if let Some(mb) = placed[b] {
                    delay = delay.max(instance.compute_graph.comm[mi][mb]);
                }
            }
        }
        worst = worst.max(load / instance.compute_graph.speed[mi] + delay);
    }
    worst
}

/// List scheduler with the same priority order as [`heft`] but a different
/// machine rule: pick the machine that minimizes the bottleneck over the
/// tasks placed so far. Non-task vertices carry no load here and are skipped.
pub fn tp_heft(instance: &Instance, dag: &DagView) -> Schedule {
    let n_m = instance.compute_graph.speed.len();
    let order = rank_order(instance, dag);
    let mut placed: Vec<Option<usize>> = vec![None; dag.n_tasks];
    for &v in &order {
        if v >= dag.n_tasks {
            continue;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        for l in 0..n_m {
            placed[v] = Some(l);
            let value = partial_bottleneck(instance, &placed);
            if value < best.0 {
                best = (value, l);
            }
        }
        placed[v] = Some(best.1);
    }
    let assignment: Vec<usize> = placed.into_iter().map(|m| m.expect("all placed")).collect();
    Schedule::new(assignment, n_m).expect("machines are in range")
}

/// Nearest-integer recovery of a schedule from the relaxation's border
/// vector: undo the homogenization sign, map entries to [0, 1], and give
/// each task its argmax machine (lowest index on ties).
pub fn naive_round(solution: &SdpSolution, instance: &Instance) -> Schedule {
    let n_tasks = instance.task_graph.n_tasks();
    let n_m = instance.compute_graph.speed.len();
    let x = &solution.x_star;
    debug_assert_eq!(x.len(), n_tasks * n_m + 1);
    let u = x[n_tasks * n_m];
    let mut assignment = vec![0usize; n_tasks];
    for (task, slot) in assignment.iter_mut().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for l in 0..n_m {
            let level = (x[l * n_tasks + task] * u + 1.0) / 2.0;
            if level > best {
                best = level;
                *slot = l;
            }
        }
    }
    Schedule::new(assignment, n_m).expect("machines are in range")
}

/// Pairs the largest demands with the fastest machines. Only valid (and
/// optimal among one-task-per-machine assignments) when communication is
/// free, the task graph has no edges, and there are at least as many
/// machines as tasks.
pub fn greedy_sorted(instance: &Instance) -> Result<Schedule, Error> {
    let n_tasks = instance.task_graph.n_tasks();
    let n_m = instance.compute_graph.speed.len();
    if !instance.task_graph.edges.is_empty() {
        return Err(Error::GreedyPreconditions("task graph must have no edges".into()));
    }
    if instance.compute_graph.comm.iter().flatten().any(|&c| c != 0.0) {
        return Err(Error::GreedyPreconditions("communication delays must be zero".into()));
    }
    if n_tasks > n_m {
        return Err(Error::GreedyPreconditions(format!(
            "needs at least as many machines as tasks ({n_m} < {n_tasks})"
        )));
    }
    let mut tasks: Vec<usize> = (0..n_tasks).collect();
    tasks.sort_by(|&a, &b| {
        instance.task_graph.compute[b]
            .total_cmp(&instance.task_graph.compute[a])
            .then(a.cmp(&b))
    });
    let mut machines: Vec<usize> = (0..n_m).collect();
    machines.sort_by(|&a, &b| {
        instance.compute_graph.speed[b]
            .total_cmp(&instance.compute_graph.speed[a])
            .then(a.cmp(&b))
    });
    let mut assignment = vec![0usize; n_tasks];
    for (rank, &task) in tasks.iter().enumerate() {
        assignment[task] = machines[rank];
    }
    Ok(Schedule::new(assignment, n_m).expect("machines are in range"))
}

/// Exact minimum-bottleneck schedule by enumeration, with the first minimum
/// in lexicographic assignment order. Works on any valid instance (it only
/// needs the bottleneck evaluator), but refuses to enumerate more than
/// `limit` schedules.
pub fn brute_force(instance: &Instance, limit: u128) -> Result<(Schedule, f64), Error> {
    let n_tasks = instance.task_graph.n_tasks();
    let n_m = instance.compute_graph.speed.len();
    let required = (0..n_tasks)
        .try_fold(1u128, |acc, _| acc.checked_mul(n_m as u128))
        .unwrap_or(u128::MAX);
    if required > limit {
        return Err(Error::BruteForceLimit { required, limit });
    }
    let mut assignment = vec![0usize; n_tasks];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let schedule = Schedule::new(assignment.clone(), n_m).expect("machines are in range");
        let value = evaluator::bottleneck(instance, &schedule);
        if best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, assignment.clone()));
        }
        // Odometer increment with the last task fastest: lexicographic order.
        let mut pos = n_tasks;
        while pos > 0 {
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < n_m {
                break;
            }
            assignment[pos] = 0;
            if pos == 0 {
                let (value, assignment) = best.expect("at least one schedule");
                let schedule = Schedule::new(assignment, n_m).expect("machines are in range");
                return Ok((schedule, value));
            }
        }
        if n_tasks == 0 {
            unreachable!("instances have at least one task");
        }
    }
}
