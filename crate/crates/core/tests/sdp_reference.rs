//! Cross-checks the splitting solver against an independently coded
//! reference on small instances.
//!
//! The reference shares only the problem data (the homogenized forms). It
//! eliminates the epigraph variable and minimizes the piecewise-linear
//! objective max_e <Q_e, Z> / 4 directly over the spectrahedron
//! {Z >= 0, diag(Z) = 1, assignment rows} by projected subgradient descent
//! with an adaptive Polyak level. Feasibility is restored after every step
//! by alternating projections onto the affine rows and the cone, which
//! converge quickly because that intersection contains strictly positive
//! definite points. No dual variables, no over-relaxation, no shared code
//! paths with the production solver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

use bsched_core::model::{ComputeGraph, Instance, TaskGraph};
use bsched_core::qcqp::{build_forms, homogenize, HomogenizedForms};
use bsched_core::sdp::{solve, AssignmentForm, SdpProblem, SolveConfig, SolveStatus};

/// One linear functional <G, Z> = rhs over the bordered matrix.
struct AffineRow {
    g: DMatrix<f64>,
    rhs: f64,
}

fn embed(m: &DMatrix<f64>, bordered: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(bordered, bordered);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Builds the equality rows (unit diagonal, assignment forms, border pins)
/// directly as symmetric matrices over the bordered variable.
fn affine_rows(forms: &HomogenizedForms, bordered_pins: bool) -> Vec<AffineRow> {
    let l = forms.n_tasks * forms.n_machines + 1;
    let n = l + 1;
    let mut rows = Vec::new();
    for k in 0..n {
        let mut g = DMatrix::zeros(n, n);
        g[(k, k)] = 1.0;
        rows.push(AffineRow { g, rhs: 1.0 });
    }
    for a in &forms.assignment_forms {
        rows.push(AffineRow {
            g: embed(a, n),
            rhs: 0.0,
        });
    }
    if bordered_pins {
        for i in 0..forms.n_tasks {
            let mut g = DMatrix::zeros(n, n);
            for machine in 0..forms.n_machines {
                let idx = machine * forms.n_tasks + i;
                g[(idx, l)] = 0.5;
                g[(l, idx)] = 0.5;
            }
            rows.push(AffineRow {
                g,
                rhs: 2.0 - forms.n_machines as f64,
            });
        }
        let mut pin = DMatrix::zeros(n, n);
        pin[(l - 1, l)] = 0.5;
        pin[(l, l - 1)] = 0.5;
        rows.push(AffineRow { g: pin, rhs: 1.0 });
    }
    rows
}

struct Reference {
    rows: Vec<AffineRow>,
    gram_chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    edges: Vec<DMatrix<f64>>,
    dim: usize,
}

impl Reference {
    fn new(forms: &HomogenizedForms, bordered_pins: bool) -> Reference {
        let l = forms.n_tasks * forms.n_machines + 1;
        let dim = l + 1;
        let rows = affine_rows(forms, bordered_pins);
        let k = rows.len();
        let mut gram = DMatrix::zeros(k, k);
        for r in 0..k {
            for s in 0..k {
                gram[(r, s)] = inner(&rows[r].g, &rows[s].g);
            }
        }
        gram += DMatrix::identity(k, k) * 1e-12;
        let gram_chol = nalgebra::Cholesky::new(gram).expect("reference gram factorization");
        let edges = forms.edge_forms.iter().map(|ef| embed(&ef.q, dim)).collect();
        Reference {
            rows,
            gram_chol,
            edges,
            dim,
        }
    }

    fn project_affine(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let k = self.rows.len();
        let mut resid = DVector::zeros(k);
        for (r, row) in self.rows.iter().enumerate() {
            resid[r] = inner(&row.g, z) - row.rhs;
        }
        let w = self.gram_chol.solve(&resid);
        let mut out = z.clone();
        for (r, row) in self.rows.iter().enumerate() {
            out -= &row.g * w[r];
        }
        out
    }

    fn project_psd(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let eig = SymmetricEigen::new(z.clone());
        let mut scaled = eig.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= eig.eigenvalues[k].max(0.0);
        }
        &scaled * eig.eigenvectors.transpose()
    }

    fn violation(&self, z: &DMatrix<f64>) -> f64 {
        let mut v: f64 = 0.0;
        for row in &self.rows {
            v = v.max((inner(&row.g, z) - row.rhs).abs());
        }
        let min_eig = SymmetricEigen::new(z.clone())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        v.max(-min_eig)
    }

    /// Alternating projections onto the affine rows and the cone until the
    /// worst violation drops below `tol` (or the sweep budget runs out).
    fn restore(&self, mut z: DMatrix<f64>, tol: f64, max_sweeps: usize) -> DMatrix<f64> {
        for _ in 0..max_sweeps {
            z = self.project_psd(&self.project_affine(&z));
            if self.violation(&z) < tol {
                break;
            }
        }
        z
    }

    /// Objective value at `z` and the index of the edge attaining it.
    fn objective(&self, z: &DMatrix<f64>) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (e, q) in self.edges.iter().enumerate() {
            let v = inner(q, z) / 4.0;
            if v > best.0 {
                best = (v, e);
            }
        }
        best
    }

    /// Minimizes max_e <Q_e, Z> / 4 over the spectrahedron by projected
    /// subgradient steps aimed at a level slightly below the incumbent. The
    /// level margin `delta` is halved stage by stage, so late stages polish
    /// the incumbent down to the optimum.
    fn min_objective(&self) -> f64 {
        let mut z = self.restore(DMatrix::identity(self.dim, self.dim), 1e-12, 10_000);
        let (f0, _) = self.objective(&z);
        let mut f_best = f0;
        let mut z_best = z.clone();
        let scale = f0.abs().max(1.0);
        let mut delta = 0.25 * scale;
        while delta > 1e-7 * scale {
            for _ in 0..400 {
                let (f, e) = self.objective(&z);
                if f < f_best {
                    f_best = f;
                    z_best = z.clone();
                }
                let g = &self.edges[e] / 4.0;
                let step = (f - (f_best - delta)) / inner(&g, &g);
                if step > 0.0 {
                    z -= &g * step;
                }
                z = self.restore(z, delta.min(1e-6) * 1e-3, 400);
            }
            delta *= 0.5;
            z = z_best.clone();
        }
        let polished = self.restore(z_best, 1e-12, 20_000);
        self.objective(&polished).0.min(f_best)
    }
}

fn two_by_two_instance() -> Instance {
    Instance {
        task_graph: TaskGraph {
            compute: vec![1.7, 0.9],
            edges: vec![(0, 1), (1, 0)],
        },
        compute_graph: ComputeGraph {
            speed: vec![1.3, 0.8],
            comm: vec![vec![0.0, 1.1], vec![0.6, 0.0]],
        },
        metadata: BTreeMap::new(),
    }
}

/// Best integral schedule value; the relaxation optimum can never exceed it.
fn best_schedule_value(forms: &HomogenizedForms) -> f64 {
    let n = forms.n_tasks * forms.n_machines;
    let mut best = f64::INFINITY;
    for code in 0..forms.n_machines.pow(forms.n_tasks as u32) {
        let mut x = DVector::from_element(n + 1, 1.0);
        let mut rem = code;
        for i in 0..forms.n_tasks {
            let machine = rem % forms.n_machines;
            rem /= forms.n_machines;
            for l in 0..forms.n_machines {
                x[l * forms.n_tasks + i] = if l == machine { 1.0 } else { -1.0 };
            }
        }
        let value = forms
            .edge_forms
            .iter()
            .map(|ef| (x.transpose() * &ef.q * &x)[(0, 0)] / 4.0)
            .fold(f64::NEG_INFINITY, f64::max);
        best = best.min(value);
    }
    best
}

#[test]
fn splitting_solver_matches_subgradient_reference() {
    let inst = two_by_two_instance();
    let forms = homogenize(&build_forms(&inst).unwrap());
    let config = SolveConfig {
        tol: 1e-9,
        ..SolveConfig::default()
    };

    for (shape, pins) in [(AssignmentForm::Lifted, false), (AssignmentForm::Bordered, true)] {
        let problem = SdpProblem::from_forms(&forms, shape);
        let sol = solve(&problem, &config).unwrap();
        assert_eq!(sol.diagnostics.status, SolveStatus::Converged);

        let reference = Reference::new(&forms, pins);
        let t_ref = reference.min_objective();
        assert!(
            t_ref <= best_schedule_value(&forms) + 1e-6,
            "reference exceeds the best integral schedule"
        );

        let t_admm = sol.objective(&problem);
        assert!(
            (t_admm - t_ref).abs() <= 1e-4_f64.max(1e-4 * t_ref.abs()),
            "shape {shape:?}: solver {t_admm} vs reference {t_ref}"
        );
        assert!(
            (sol.t_star - t_ref).abs() <= 1e-4_f64.max(1e-4 * t_ref.abs()),
            "shape {shape:?}: t* {} vs reference {t_ref}",
            sol.t_star
        );
    }
}

/// The same machinery on a second, randomly perturbed instance, to make sure
/// the agreement is not an artifact of one hand-picked matrix.
#[test]
fn splitting_solver_matches_reference_on_perturbed_instance() {
    use rand::Rng;
    let mut rng = ChaCha12Rng::seed_from_u64(4242);
    let mut inst = two_by_two_instance();
    for p in &mut inst.task_graph.compute {
        *p *= rng.gen_range(0.7..1.4);
    }
    for e in &mut inst.compute_graph.speed {
        *e *= rng.gen_range(0.7..1.4);
    }
    inst.compute_graph.comm[0][1] = rng.gen_range(0.2..2.0);
    inst.compute_graph.comm[1][0] = rng.gen_range(0.2..2.0);

    let forms = homogenize(&build_forms(&inst).unwrap());
    let config = SolveConfig {
        tol: 1e-9,
        ..SolveConfig::default()
    };
    let problem = SdpProblem::from_forms(&forms, AssignmentForm::Bordered);
    let sol = solve(&problem, &config).unwrap();
    let reference = Reference::new(&forms, true);
    let t_ref = reference.min_objective();
    let t_admm = sol.objective(&problem);
    assert!(
        (t_admm - t_ref).abs() <= 1e-4_f64.max(1e-4 * t_ref.abs()),
        "solver {t_admm} vs reference {t_ref}"
    );
}
