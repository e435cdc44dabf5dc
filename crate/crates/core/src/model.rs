//! Problem instances (task graph + machine network) and schedules.
//!
//! Instances are exchanged as JSON documents of the form
//!
//! ```json
//! {
//!   "tasks": {"compute": [2.0, 1.0]},
//!   "edges": [[0, 1]],
//!   "machines": {"speed": [1.0, 3.0]},
//!   "comm": [[0.0, 0.5], [0.5, 0.0]],
//!   "metadata": {"generator": "degree-band"}
//! }
//! ```
//!
//! where `metadata` is optional. The task graph is a general directed graph:
//! cycles are allowed, self-loops are not.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Directed graph of tasks; `compute[i]` is the work demanded by task `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskGraph {
    pub compute: Vec<f64>,
    /// Ordered pairs `(i, j)`: the result of task `i` feeds task `j`.
    pub edges: Vec<(usize, usize)>,
}

impl TaskGraph {
    pub fn n_tasks(&self) -> usize {
        self.compute.len()
    }

    /// Tasks that consume the output of `task`, in edge order.
    pub fn successors(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .filter(move |(from, _)| *from == task)
            .map(|&(_, to)| to)
    }
}

/// Machine network; `comm[j][k]` is the delay of shipping one task result
/// from machine `j` to machine `k`. Not required to be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeGraph {
    pub speed: Vec<f64>,
    pub comm: Vec<Vec<f64>>,
}

impl ComputeGraph {
    pub fn n_machines(&self) -> usize {
        self.speed.len()
    }
}

/// A scheduling problem: what to run, and where it can run.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub task_graph: TaskGraph,
    pub compute_graph: ComputeGraph,
    /// Free-form provenance (generator name, seed, ...). Preserved by save/load.
    pub metadata: BTreeMap<String, String>,
}

impl Instance {
    pub fn n_tasks(&self) -> usize {
        self.task_graph.n_tasks()
    }

    pub fn n_machines(&self) -> usize {
        self.compute_graph.n_machines()
    }

    /// Checks every structural invariant and returns one message per violation.
    /// An empty result means the instance is usable by every other module.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let n_tasks = self.n_tasks();
        let n_machines = self.n_machines();

        if n_tasks == 0 {
            violations.push("tasks.compute must be nonempty".to_string());
        }
        for (i, &p) in self.task_graph.compute.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                violations.push(format!("tasks.compute[{i}] must be positive and finite, got {p}"));
            }
        }

        if n_machines == 0 {
            violations.push("machines.speed must be nonempty".to_string());
        }
        for (j, &e) in self.compute_graph.speed.iter().enumerate() {
            if !e.is_finite() || e <= 0.0 {
                violations.push(format!("machines.speed[{j}] must be positive, got {e}"));
            }
        }

        if self.compute_graph.comm.len() != n_machines {
            violations.push(format!(
                "comm must have one row per machine: {} rows for {} machines",
                self.compute_graph.comm.len(),
                n_machines
            ));
        }
        for (j, row) in self.compute_graph.comm.iter().enumerate() {
            if row.len() != n_machines {
                violations.push(format!(
                    "comm[{j}] must have one entry per machine: {} for {}",
                    row.len(),
                    n_machines
                ));
                continue;
            }
            for (k, &c) in row.iter().enumerate() {
                if !c.is_finite() || c < 0.0 {
                    violations.push(format!("comm[{j}][{k}] must be nonnegative and finite, got {c}"));
                } else if j == k && c != 0.0 {
                    violations.push(format!("comm[{j}][{j}] must be zero (no self-delay), got {c}"));
                }
            }
        }

        let mut seen = BTreeSet::new();
        for &(from, to) in &self.task_graph.edges {
            if from >= n_tasks || to >= n_tasks {
                violations.push(format!("edge ({from}, {to}) references a task out of range"));
                continue;
            }
            if from == to {
                violations.push(format!("edge ({from}, {to}) is a self-loop"));
            }
            if !seen.insert((from, to)) {
                violations.push(format!("edge ({from}, {to}) is duplicated"));
            }
        }

        violations
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn from_json(text: &str) -> Result<Instance, Error> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Instance {
            task_graph: TaskGraph {
                compute: file.tasks.compute,
                edges: file.edges.into_iter().map(|[a, b]| (a, b)).collect(),
            },
            compute_graph: ComputeGraph {
                speed: file.machines.speed,
                comm: file.comm,
            },
            metadata: file.metadata,
        })
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            tasks: TasksSection {
                compute: self.task_graph.compute.clone(),
            },
            edges: self.task_graph.edges.iter().map(|&(a, b)| [a, b]).collect(),
            machines: MachinesSection {
                speed: self.compute_graph.speed.clone(),
            },
            comm: self.compute_graph.comm.clone(),
            metadata: self.metadata.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("instance serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Instance, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Instance::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    tasks: TasksSection,
    edges: Vec<[usize; 2]>,
    machines: MachinesSection,
    comm: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct TasksSection {
    compute: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MachinesSection {
    speed: Vec<f64>,
}

/// An assignment of every task to exactly one machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    assignment: Vec<usize>,
    n_machines: usize,
}

impl Schedule {
    pub fn new(assignment: Vec<usize>, n_machines: usize) -> Result<Schedule, Error> {
        if let Some((task, &machine)) = assignment
            .iter()
            .enumerate()
            .find(|(_, &m)| m >= n_machines)
        {
            return Err(Error::InvalidSchedule(format!(
                "task {task} assigned to machine {machine}, only {n_machines} machines exist"
            )));
        }
        Ok(Schedule {
            assignment,
            n_machines,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn machine_of(&self, task: usize) -> usize {
        self.assignment[task]
    }

    pub fn n_tasks(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_machines(&self) -> usize {
        self.n_machines
    }

    /// 0/1 mapper matrix `M` with `M[i][l] = 1` iff task `i` runs on machine `l`.
    /// Every row sums to one.
    pub fn mapper_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_tasks(), self.n_machines);
        for (task, &machine) in self.assignment.iter().enumerate() {
            m[(task, machine)] = 1.0;
        }
        m
    }

    /// Column-major flattening of the mapper matrix: entry `l * n_tasks + i`
    /// is `M[i][l]`. This layout is what the quadratic forms are built against.
    pub fn mapper_vec(&self) -> DVector<f64> {
        let n_tasks = self.n_tasks();
        let mut v = DVector::zeros(n_tasks * self.n_machines);
        for (task, &machine) in self.assignment.iter().enumerate() {
            v[machine * n_tasks + task] = 1.0;
        }
        v
    }
}
