//! Quadratic forms of the assignment problem.
//!
//! A schedule is encoded as the column-major flattening `m` of its 0/1 mapper
//! matrix (see [`Schedule::mapper_vec`]). For every task-graph edge `(i, i')`
//! this module builds a matrix `Q` such that
//!
//! ```text
//! m' Q m  =  compute_time(i) + comm[machine(i)][machine(i')]
//! ```
//!
//! i.e. the producer's full (load-shared) compute time plus the delay of the
//! one link this edge crosses. The bottleneck objective is then the max of
//! these forms over edges, up to the terms of edge-less tasks, which are
//! dominated whenever their machine also hosts a producer. The forms are
//! Kronecker products: the compute part pairs the inverse-speed diagonal with
//! a column selector for task `i`, the comm part pairs the transposed delay
//! matrix with a selector picking the `(i, i')` task pair. Everything is
//! symmetrized, which leaves the quadratic form's values unchanged.
//!
//! [`homogenize`] lifts the forms to the ±1 encoding `x = 2m - 1` with an
//! extra homogenization coordinate fixed at 1, which is the shape the
//! semidefinite relaxation consumes.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::model::Instance;

/// The quadratic form of one task-graph edge.
#[derive(Debug, Clone)]
pub struct EdgeForm {
    pub edge: (usize, usize),
    pub q: DMatrix<f64>,
}

/// Per-edge forms over the 0/1 encoding, plus the shared structural pieces.
#[derive(Debug, Clone)]
pub struct QuadraticForms {
    pub n_tasks: usize,
    pub n_machines: usize,
    /// One symmetric `(n_tasks * n_machines)^2` form per edge, in edge order.
    pub edge_forms: Vec<EdgeForm>,
    /// Row `i` sums task `i`'s copies across machines: `H m = 1` for every
    /// valid schedule.
    pub selector: DMatrix<f64>,
    /// Diagonal matrix of inverse machine speeds.
    pub inv_speed: DMatrix<f64>,
}

/// Per-edge forms over the homogenized ±1 encoding.
#[derive(Debug, Clone)]
pub struct HomogenizedForms {
    pub n_tasks: usize,
    pub n_machines: usize,
    /// One symmetric `(n_tasks * n_machines + 1)^2` form per edge. For a valid
    /// schedule's `x = 2m - 1` and `x~ = [x, 1]`: `x~' Q~ x~ = 4 m' Q m`.
    pub edge_forms: Vec<EdgeForm>,
    /// One matrix per task whose inner product with `x~ x~'` vanishes exactly
    /// when the task occupies one machine: `sum_l x[l * n_tasks + i] = 2 - n_machines`.
    pub assignment_forms: Vec<DMatrix<f64>>,
}

/// Builds the per-edge quadratic forms for a valid instance.
///
/// Fails with [`Error::NoEdges`] when the task graph has no edges, because
/// then the objective has no quadratic constraints to relax.
pub fn build_forms(instance: &Instance) -> Result<QuadraticForms, Error> {
    if instance.task_graph.edges.is_empty() {
        return Err(Error::NoEdges);
    }
    let n_tasks = instance.n_tasks();
    let n_machines = instance.n_machines();

    let inv_speed = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n_machines,
        instance.compute_graph.speed.iter().map(|&e| 1.0 / e),
    ));
    let comm = DMatrix::from_fn(n_machines, n_machines, |j, k| instance.compute_graph.comm[j][k]);
    let comm_t = comm.transpose();
    let p = nalgebra::DVector::from_column_slice(&instance.task_graph.compute);

    let mut edge_forms = Vec::with_capacity(instance.task_graph.edges.len());
    for &(i, j) in &instance.task_graph.edges {
        // Column selector: demand vector in column i, zero elsewhere. Against
        // the machine-block layout of m this accumulates the load sharing
        // machine(i), scaled by that machine's inverse speed.
        let mut demand_sel = DMatrix::zeros(n_tasks, n_tasks);
        demand_sel.set_column(i, &p);
        // Pair selector oriented so the form reads comm[machine(i)][machine(j)],
        // the delay from the producer's machine to the consumer's.
        let mut pair_sel = DMatrix::zeros(n_tasks, n_tasks);
        pair_sel[(j, i)] = 1.0;

        let raw = inv_speed.transpose().kronecker(&demand_sel) + comm_t.kronecker(&pair_sel);
        let q = (&raw + raw.transpose()) * 0.5;
        edge_forms.push(EdgeForm { edge: (i, j), q });
    }

    let selector = DMatrix::from_fn(n_tasks, n_tasks * n_machines, |i, col| {
        if col % n_tasks == i {
            1.0
        } else {
            0.0
        }
    });

    Ok(QuadraticForms {
        n_tasks,
        n_machines,
        edge_forms,
        selector,
        inv_speed,
    })
}

/// Lifts the 0/1 forms to the homogenized ±1 encoding.
///
/// Substituting `m = (x + 1) / 2` into `m' Q m` gives
/// `(x' Q x + 2 (1' Q x) + 1' Q 1) / 4`; the returned matrices absorb the
/// linear and constant parts into a border so that the whole thing is a
/// single quadratic form in `x~ = [x, 1]` worth exactly `4 m' Q m`.
pub fn homogenize(forms: &QuadraticForms) -> HomogenizedForms {
    let n = forms.n_tasks * forms.n_machines;
    let ones = nalgebra::DVector::from_element(n, 1.0);

    let edge_forms = forms
        .edge_forms
        .iter()
        .map(|ef| {
            let border = &ef.q * &ones;
            let corner = border.sum();
            let mut lifted = DMatrix::zeros(n + 1, n + 1);
            lifted.view_mut((0, 0), (n, n)).copy_from(&ef.q);
            for k in 0..n {
                lifted[(k, n)] = border[k];
                lifted[(n, k)] = border[k];
            }
            lifted[(n, n)] = corner;
            EdgeForm {
                edge: ef.edge,
                q: lifted,
            }
        })
        .collect();

    // In ±1 coordinates "exactly one machine per task" reads
    // sum_l x[l * n_tasks + i] = 2 - n_machines; each form below equates that
    // sum (read through the border of x~ x~') with the constant.
    let assignment_forms = (0..forms.n_tasks)
        .map(|i| {
            let mut a = DMatrix::zeros(n + 1, n + 1);
            for l in 0..forms.n_machines {
                let idx = l * forms.n_tasks + i;
                a[(idx, n)] = 0.5;
                a[(n, idx)] = 0.5;
            }
            a[(n, n)] = forms.n_machines as f64 - 2.0;
            a
        })
        .collect();

    HomogenizedForms {
        n_tasks: forms.n_tasks,
        n_machines: forms.n_machines,
        edge_forms,
        assignment_forms,
    }
}
