//! Semidefinite relaxation of the ±1 assignment problem and its solver.
//!
//! The relaxed problem: find a unit-diagonal matrix `X~` (the second moment
//! of the ±1 encoding) and a border vector `x~` minimizing `t` subject to
//!
//! * `<Q~_e, X~> <= 4 t` for every task-graph edge,
//! * `<A_i, X~> = 0` for every task (one machine per task, read through the
//!   homogenization coordinate),
//! * optionally the same one-machine rows imposed directly on `x~`,
//! * `[[X~, x~], [x~', 1]]` positive semidefinite.
//!
//! The solver stacks everything into the single bordered matrix
//! `Z = [[X~, x~], [x~', 1]]`: its diagonal is all ones, every constraint
//! above is affine in `(Z, t)`, and the cone is "Z PSD" next to a free `t`
//! and nonnegative slacks for the epigraph inequalities. That shape yields a
//! two-block splitting: projection onto the affine set (one cached Cholesky
//! factorization of `A A'`) alternating with projection onto the cone (one
//! symmetric eigendecomposition per iteration, negative eigenvalues clamped),
//! coupled by scaled dual updates with over-relaxation and residual-balanced
//! step adaptation. The epigraph variable `t` rides along in the affine
//! block; no bisection is involved.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::Error;
use crate::qcqp::HomogenizedForms;

/// How the one-machine-per-task rows are imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssignmentForm {
    /// Only through `<A_i, X~> = 0` on the lifted matrix.
    Lifted,
    /// Additionally pin the border vector: `sum_l x[l n_T + i] = 2 - n_K` and
    /// the homogenization coordinate itself fixed at one. Tightens the
    /// relaxation and keeps the border usable for direct recovery.
    #[default]
    Bordered,
}

/// A semidefinite program in the shape described in the module docs.
///
/// `lifted_dim` is the size of `X~`; when built from [`HomogenizedForms`]
/// that is `n_tasks * n_machines + 1`. Problems can also be assembled
/// directly, which the tests use for degenerate cases.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub lifted_dim: usize,
    /// Symmetric `lifted_dim` matrices `Q~_e`, each constrained `<Q~_e, X~> <= 4 t`.
    pub edge_constraints: Vec<DMatrix<f64>>,
    /// Pairs `(A, rhs)` with `<A, X~> = rhs`.
    pub equality_constraints: Vec<(DMatrix<f64>, f64)>,
    /// Pairs `(h, rhs)` with `h' x~ = rhs` on the border vector.
    pub border_constraints: Vec<(DVector<f64>, f64)>,
}

impl SdpProblem {
    pub fn from_forms(forms: &HomogenizedForms, shape: AssignmentForm) -> SdpProblem {
        let n = forms.n_tasks * forms.n_machines;
        let lifted_dim = n + 1;
        let edge_constraints = forms.edge_forms.iter().map(|ef| ef.q.clone()).collect();
        let equality_constraints = forms
            .assignment_forms
            .iter()
            .map(|a| (a.clone(), 0.0))
            .collect();
        let mut border_constraints = Vec::new();
        if shape == AssignmentForm::Bordered {
            for i in 0..forms.n_tasks {
                let mut h = DVector::zeros(lifted_dim);
                for l in 0..forms.n_machines {
                    h[l * forms.n_tasks + i] = 1.0;
                }
                border_constraints.push((h, 2.0 - forms.n_machines as f64));
            }
            let mut pin = DVector::zeros(lifted_dim);
            pin[n] = 1.0;
            border_constraints.push((pin, 1.0));
        }
        SdpProblem {
            lifted_dim,
            edge_constraints,
            equality_constraints,
            border_constraints,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    /// Tolerance on primal and dual residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation factor applied to the affine iterate, in (0, 2).
    pub over_relaxation: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-6,
            max_iter: 50_000,
            over_relaxation: 1.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Iteration budget exhausted; the best iterate is still returned.
    MaxIter,
    /// The affine constraints are mutually inconsistent.
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max-iter",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Border vector `x~*`, length `lifted_dim`.
    pub x_star: DVector<f64>,
    /// Relaxed second-moment matrix `X~*`: exactly PSD (it comes off the cone
    /// side of the splitting) with its diagonal renormalized to exactly one,
    /// so every entry lies in [-1, 1] up to roundoff.
    pub gram: DMatrix<f64>,
    /// Value of the epigraph variable at the final iterate.
    pub t_star: f64,
    pub diagnostics: Diagnostics,
}

impl SdpSolution {
    /// `max_e <Q~_e, X~*> / 4`: the relaxation objective at the returned
    /// matrix, which is also the lower-bound ingredient.
    pub fn objective(&self, problem: &SdpProblem) -> f64 {
        problem
            .edge_constraints
            .iter()
            .map(|q| frob_inner(q, &self.gram) / 4.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Solver backends answer the same problem description; the default is the
/// in-crate splitting method, but tests and callers can swap in another.
pub trait SdpBackend {
    fn solve(&self, problem: &SdpProblem, config: &SolveConfig) -> Result<SdpSolution, Error>;
}

/// Convenience entry point using [`AdmmSolver`].
pub fn solve(problem: &SdpProblem, config: &SolveConfig) -> Result<SdpSolution, Error> {
    AdmmSolver.solve(problem, config)
}

pub struct AdmmSolver;

impl SdpBackend for AdmmSolver {
    fn solve(&self, problem: &SdpProblem, config: &SolveConfig) -> Result<SdpSolution, Error> {
        Workspace::build(problem)?.run(config)
    }
}

fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Index of entry `(i, j)`, `i <= j`, in the packed upper triangle.
fn svec_idx(i: usize, j: usize) -> usize {
    j * (j + 1) / 2 + i
}

/// Packs a symmetric matrix so that Frobenius inner products become dot
/// products: off-diagonal entries are scaled by sqrt(2).
fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut v = DVector::zeros(svec_len(n));
    for j in 0..n {
        for i in 0..=j {
            v[svec_idx(i, j)] = if i == j {
                m[(i, j)]
            } else {
                std::f64::consts::SQRT_2 * m[(i, j)]
            };
        }
    }
    v
}

fn unsvec(v: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let raw = v[svec_idx(i, j)];
            if i == j {
                m[(i, j)] = raw;
            } else {
                let val = raw / std::f64::consts::SQRT_2;
                m[(i, j)] = val;
                m[(j, i)] = val;
            }
        }
    }
    m
}

/// Nearest PSD matrix in Frobenius norm: eigendecompose, clamp negatives.
fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let mut scaled = eig.eigenvectors.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= eig.eigenvalues[k].max(0.0);
    }
    scaled * eig.eigenvectors.transpose()
}

/// Assembled constraint system and cached factorization for one problem.
struct Workspace {
    bordered_dim: usize,
    lifted_dim: usize,
    s_dim: usize,
    t_pos: usize,
    n_slacks: usize,
    var_dim: usize,
    a: DMatrix<f64>,
    a_t: DMatrix<f64>,
    b: DVector<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    /// Objective direction (a single one at the `t` coordinate).
    c: DVector<f64>,
    /// Per-variable scale: the iterate holds `x / col_scale`. Only `t` and
    /// the slacks are scaled; the svec block must stay uniform because a
    /// nonuniform scale would not commute with the PSD projection.
    col_scale: DVector<f64>,
    init_t: f64,
    init_slacks: Vec<f64>,
}

impl Workspace {
    fn build(problem: &SdpProblem) -> Result<Workspace, Error> {
        let l = problem.lifted_dim;
        if l == 0 {
            return Err(Error::InvalidParameter("lifted dimension must be positive".into()));
        }
        if problem.edge_constraints.is_empty() {
            return Err(Error::Solver(
                "no epigraph constraints: objective is unbounded".into(),
            ));
        }
        for q in &problem.edge_constraints {
            if q.nrows() != l || q.ncols() != l {
                return Err(Error::InvalidParameter("edge constraint dimension mismatch".into()));
            }
        }
        for (a, _) in &problem.equality_constraints {
            if a.nrows() != l || a.ncols() != l {
                return Err(Error::InvalidParameter(
                    "equality constraint dimension mismatch".into(),
                ));
            }
        }
        for (h, _) in &problem.border_constraints {
            if h.len() != l {
                return Err(Error::InvalidParameter("border constraint dimension mismatch".into()));
            }
        }

        let n = l + 1; // bordered matrix size
        let s_dim = svec_len(n);
        let n_slacks = problem.edge_constraints.len();
        let t_pos = s_dim;
        let var_dim = s_dim + 1 + n_slacks;
        let n_rows = n + problem.equality_constraints.len() + problem.border_constraints.len() + n_slacks;

        let mut a = DMatrix::zeros(n_rows, var_dim);
        let mut b = DVector::zeros(n_rows);
        let mut row = 0;

        // Unit diagonal of the bordered matrix: covers diag(X~) = 1 and the
        // homogenization corner.
        for k in 0..n {
            a[(row, svec_idx(k, k))] = 1.0;
            b[row] = 1.0;
            row += 1;
        }

        // <A, X~> = rhs, embedded in the top-left block of Z.
        for (mat, rhs) in &problem.equality_constraints {
            for j in 0..l {
                for i in 0..=j {
                    let coeff = if i == j {
                        mat[(i, j)]
                    } else {
                        // Both (i, j) and (j, i) contribute to the inner
                        // product; with the sqrt(2) packing that collapses to
                        // one coefficient.
                        std::f64::consts::SQRT_2 * mat[(i, j)]
                    };
                    if coeff != 0.0 {
                        a[(row, svec_idx(i, j))] = coeff;
                    }
                }
            }
            b[row] = *rhs;
            row += 1;
        }

        // h' x~ = rhs: the border vector lives in the last column of Z.
        for (h, rhs) in &problem.border_constraints {
            for k in 0..l {
                if h[k] != 0.0 {
                    a[(row, svec_idx(k, l))] = h[k] / std::f64::consts::SQRT_2;
                }
            }
            b[row] = *rhs;
            row += 1;
        }

        // <Q~_e, X~> - 4 t + slack_e = 0.
        let mut init_slacks = Vec::with_capacity(n_slacks);
        let mut init_t = f64::NEG_INFINITY;
        for q in &problem.edge_constraints {
            init_t = init_t.max(q.trace() / 4.0);
        }
        for (e, q) in problem.edge_constraints.iter().enumerate() {
            for j in 0..l {
                for i in 0..=j {
                    let coeff = if i == j {
                        q[(i, j)]
                    } else {
                        std::f64::consts::SQRT_2 * q[(i, j)]
                    };
                    if coeff != 0.0 {
                        a[(row, svec_idx(i, j))] = coeff;
                    }
                }
            }
            a[(row, t_pos)] = -4.0;
            a[(row, s_dim + 1 + e)] = 1.0;
            init_slacks.push(4.0 * init_t - q.trace());
            row += 1;
        }
        debug_assert_eq!(row, n_rows);

        // Column scaling: the svec coordinates sit near a unit-diagonal
        // correlation matrix (O(1)), while t and the slacks live at the
        // magnitude of the edge forms. Rescaling those columns keeps the
        // Euclidean projections from being dominated by a handful of huge
        // coordinates. The change of variables is undone in `extract`.
        let mut col_scale = DVector::from_element(var_dim, 1.0);
        let mean_q_norm = problem.edge_constraints.iter().map(|q| q.norm()).sum::<f64>()
            / n_slacks as f64;
        col_scale[t_pos] = mean_q_norm.max(1e-8);
        for (e, q) in problem.edge_constraints.iter().enumerate() {
            col_scale[s_dim + 1 + e] = q.norm().max(1e-8);
        }
        for j in 0..var_dim {
            if col_scale[j] != 1.0 {
                for r in 0..n_rows {
                    a[(r, j)] *= col_scale[j];
                }
            }
        }

        // Row equilibration: purely a conditioning aid, the solution set is
        // unchanged because each row is rescaled together with its rhs.
        for r in 0..n_rows {
            let norm = a.row(r).norm();
            if norm > 0.0 {
                for cidx in 0..var_dim {
                    a[(r, cidx)] /= norm;
                }
                b[r] /= norm;
            }
        }

        let gram = &a * a.transpose() + DMatrix::identity(n_rows, n_rows) * 1e-12;
        let chol = nalgebra::Cholesky::new(gram)
            .ok_or_else(|| Error::Solver("constraint normal matrix is not factorizable".into()))?;

        // Objective in the scaled variables. Scaling the objective does not
        // move the minimizer (t* is read from the variable, not from the
        // objective value), but its magnitude sets how hard each iteration
        // pushes on t versus feasibility. A single objective coordinate
        // against thousands of constraint coordinates needs sqrt(dim)
        // weighting, otherwise the epigraph value drifts for tens of
        // thousands of iterations after the iterate is already feasible.
        let mut c = DVector::zeros(var_dim);
        c[t_pos] = (var_dim as f64).sqrt();

        Ok(Workspace {
            bordered_dim: n,
            lifted_dim: l,
            s_dim,
            t_pos,
            n_slacks,
            var_dim,
            a_t: a.transpose(),
            a,
            b,
            chol,
            c,
            col_scale,
            init_t,
            init_slacks,
        })
    }

    /// Euclidean projection onto `{u : A u = b}`.
    fn project_affine(&self, w: &DVector<f64>) -> DVector<f64> {
        let residual = &self.a * w - &self.b;
        let correction = self.chol.solve(&residual);
        w - &self.a_t * correction
    }

    fn project_cone(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = w.clone();
        let z = project_psd(&unsvec(w.as_slice(), self.bordered_dim));
        let packed = svec(&z);
        out.rows_mut(0, self.s_dim).copy_from(&packed);
        // t stays free; slacks are clamped to the nonnegative orthant.
        for e in 0..self.n_slacks {
            let idx = self.s_dim + 1 + e;
            if out[idx] < 0.0 {
                out[idx] = 0.0;
            }
        }
        out
    }

    fn run(self, config: &SolveConfig) -> Result<SdpSolution, Error> {
        // Structural feasibility first: if not even the affine system is
        // consistent there is nothing to iterate on.
        let min_norm = self.project_affine(&DVector::zeros(self.var_dim));
        let affine_residual = (&self.a * &min_norm - &self.b).norm();
        if affine_residual > 1e-7 * (1.0 + self.b.norm()) {
            return Ok(self.extract(
                &DVector::zeros(self.var_dim),
                Diagnostics {
                    status: SolveStatus::Infeasible,
                    iterations: 0,
                    primal_residual: affine_residual,
                    dual_residual: f64::INFINITY,
                },
            ));
        }

        // Start from the identity matrix (unit diagonal, comfortably PSD) and
        // an epigraph value that makes every slack nonnegative.
        let mut v = DVector::zeros(self.var_dim);
        v.rows_mut(0, self.s_dim)
            .copy_from(&svec(&DMatrix::identity(self.bordered_dim, self.bordered_dim)));
        v[self.t_pos] = self.init_t / self.col_scale[self.t_pos];
        for (e, s) in self.init_slacks.iter().enumerate() {
            v[self.s_dim + 1 + e] = *s / self.col_scale[self.s_dim + 1 + e];
        }
        let mut lambda = DVector::zeros(self.var_dim);
        let mut rho = 1.0f64;
        let alpha = config.over_relaxation;
        let sqrt_dim = (self.var_dim as f64).sqrt();

        let mut diagnostics = Diagnostics {
            status: SolveStatus::MaxIter,
            iterations: config.max_iter,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
        };

        for iter in 0..config.max_iter {
            let w = &v - &lambda - &self.c * (1.0 / rho);
            let u = self.project_affine(&w);
            let u_relaxed = &u * alpha + &v * (1.0 - alpha);
            let v_new = self.project_cone(&(&u_relaxed + &lambda));
            lambda += &u_relaxed - &v_new;

            let primal = (&u - &v_new).norm();
            let dual = rho * (&v_new - &v).norm();
            v = v_new;

            if !primal.is_finite() || !v[self.t_pos].is_finite() {
                return Err(Error::Solver("iterates diverged to non-finite values".into()));
            }

            let eps_pri = sqrt_dim * config.tol + config.tol * u.norm().max(v.norm());
            let eps_dual = sqrt_dim * config.tol + config.tol * rho * lambda.norm();
            if primal <= eps_pri && dual <= eps_dual {
                diagnostics = Diagnostics {
                    status: SolveStatus::Converged,
                    iterations: iter + 1,
                    primal_residual: primal,
                    dual_residual: dual,
                };
                break;
            }
            diagnostics.primal_residual = primal;
            diagnostics.dual_residual = dual;

            // Residual balancing. The affine projection does not depend on
            // rho, so adapting it costs nothing beyond rescaling the scaled
            // dual variable.
            if iter % 25 == 24 {
                if primal > 10.0 * dual && rho < 1e6 {
                    rho *= 2.0;
                    lambda /= 2.0;
                } else if dual > 10.0 * primal && rho > 1e-6 {
                    rho /= 2.0;
                    lambda *= 2.0;
                }
            }
        }

        Ok(self.extract(&v, diagnostics))
    }

    fn extract(&self, v: &DVector<f64>, diagnostics: Diagnostics) -> SdpSolution {
        let mut z = unsvec(&v.as_slice()[..self.s_dim], self.bordered_dim);
        // The cone-side iterate is PSD but its diagonal only approaches one;
        // renormalizing makes the diagonal exact while preserving PSD-ness,
        // which downstream consumers (arcsin expectations, sign sampling)
        // rely on.
        let scales: Vec<f64> = (0..self.bordered_dim)
            .map(|k| 1.0 / z[(k, k)].max(1e-12).sqrt())
            .collect();
        for i in 0..self.bordered_dim {
            for j in 0..self.bordered_dim {
                z[(i, j)] *= scales[i] * scales[j];
            }
        }
        let gram = z.view((0, 0), (self.lifted_dim, self.lifted_dim)).into_owned();
        let x_star = z.view((0, self.lifted_dim), (self.lifted_dim, 1)).into_owned();
        SdpSolution {
            x_star: DVector::from_column_slice(x_star.as_slice()),
            gram,
            t_star: v[self.t_pos] * self.col_scale[self.t_pos],
            diagnostics,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator;
    use crate::qcqp::{build_forms, homogenize};
    use crate::test_util::random_instance;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn tiny_problem(shape: AssignmentForm) -> (crate::model::Instance, SdpProblem) {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let inst = random_instance(&mut rng, 2, 2, 0.6, true);
        let forms = homogenize(&build_forms(&inst).unwrap());
        let problem = SdpProblem::from_forms(&forms, shape);
        (inst, problem)
    }

    #[test]
    fn one_dimensional_epigraph() {
        // Single 1x1 constraint <[q], X~> <= 4t with unit diagonal forces
        // X~ = [1] and t = q / 4.
        let q = 3.0;
        let problem = SdpProblem {
            lifted_dim: 1,
            edge_constraints: vec![DMatrix::from_element(1, 1, q)],
            equality_constraints: vec![],
            border_constraints: vec![],
        };
        let sol = solve(&problem, &SolveConfig::default()).unwrap();
        assert_eq!(sol.diagnostics.status, SolveStatus::Converged);
        assert_relative_eq!(sol.gram[(0, 0)], 1.0, epsilon = 1e-6);
        assert_relative_eq!(sol.t_star, q / 4.0, epsilon = 1e-5);
    }

    #[test]
    fn solution_satisfies_constraints_within_tolerance() {
        let (_, problem) = tiny_problem(AssignmentForm::Bordered);
        let sol = solve(&problem, &SolveConfig::default()).unwrap();
        assert_eq!(sol.diagnostics.status, SolveStatus::Converged);

        let l = problem.lifted_dim;
        for k in 0..l {
            assert_relative_eq!(sol.gram[(k, k)], 1.0, epsilon = 1e-9);
        }
        let eig = SymmetricEigen::new(sol.gram.clone());
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-8), "{:?}", eig.eigenvalues);

        for q in &problem.edge_constraints {
            assert!(frob_inner(q, &sol.gram) <= 4.0 * sol.t_star + 1e-4);
        }
        for (a, rhs) in &problem.equality_constraints {
            assert_relative_eq!(frob_inner(a, &sol.gram), *rhs, epsilon = 1e-5);
        }
        for (h, rhs) in &problem.border_constraints {
            assert_relative_eq!(h.dot(&sol.x_star), *rhs, epsilon = 1e-5);
        }
    }

    #[test]
    fn every_schedule_is_feasible_and_dominates_the_relaxation() {
        // Rank-one points built from valid schedules satisfy all constraints,
        // so the relaxed optimum can never exceed the best schedule value.
        let (inst, problem) = tiny_problem(AssignmentForm::Bordered);
        let forms = homogenize(&build_forms(&inst).unwrap());
        let sol = solve(&problem, &SolveConfig::default()).unwrap();

        let n = inst.n_tasks() * inst.n_machines();
        let mut best = f64::INFINITY;
        for code in 0..inst.n_machines().pow(inst.n_tasks() as u32) {
            let mut assignment = Vec::new();
            let mut rem = code;
            for _ in 0..inst.n_tasks() {
                assignment.push(rem % inst.n_machines());
                rem /= inst.n_machines();
            }
            let schedule = crate::model::Schedule::new(assignment, inst.n_machines()).unwrap();
            let m = schedule.mapper_vec();
            let mut x_tilde = DVector::from_element(n + 1, 1.0);
            for k in 0..n {
                x_tilde[k] = 2.0 * m[k] - 1.0;
            }
            let rank_one = &x_tilde * x_tilde.transpose();
            for (a, rhs) in &problem.equality_constraints {
                assert_relative_eq!(frob_inner(a, &rank_one), *rhs, epsilon = 1e-9);
            }
            for (h, rhs) in &problem.border_constraints {
                assert_relative_eq!(h.dot(&x_tilde), *rhs, epsilon = 1e-9);
            }
            let value = forms
                .edge_forms
                .iter()
                .map(|ef| (x_tilde.transpose() * &ef.q * &x_tilde)[(0, 0)] / 4.0)
                .fold(f64::NEG_INFINITY, f64::max);
            // The per-edge forms bound the true bottleneck from below, which
            // keeps the chain relaxation <= edge objective <= bottleneck intact.
            assert!(value <= evaluator::bottleneck(&inst, &schedule) + 1e-9);
            best = best.min(value);
        }
        assert!(sol.t_star <= best + 1e-4, "t* = {}, best schedule = {best}", sol.t_star);
        assert!(sol.objective(&problem) <= best + 1e-4);
    }

    #[test]
    fn lifted_and_bordered_forms_both_solve() {
        let (_, lifted) = tiny_problem(AssignmentForm::Lifted);
        let (_, bordered) = tiny_problem(AssignmentForm::Bordered);
        let config = SolveConfig {
            tol: 1e-9,
            ..SolveConfig::default()
        };
        let sol_l = solve(&lifted, &config).unwrap();
        let sol_b = solve(&bordered, &config).unwrap();
        assert_eq!(sol_l.diagnostics.status, SolveStatus::Converged);
        assert_eq!(sol_b.diagnostics.status, SolveStatus::Converged);
        // The bordered form constrains strictly more, so it cannot be looser.
        assert!(sol_b.t_star >= sol_l.t_star - 1e-6);
    }

    #[test]
    fn contradictory_equalities_report_infeasible() {
        let mut fix_corner = DMatrix::zeros(2, 2);
        fix_corner[(0, 0)] = 1.0;
        let problem = SdpProblem {
            lifted_dim: 2,
            edge_constraints: vec![DMatrix::identity(2, 2)],
            // X~[0][0] = 2 contradicts the unit diagonal.
            equality_constraints: vec![(fix_corner, 2.0)],
            border_constraints: vec![],
        };
        let sol = solve(&problem, &SolveConfig::default()).unwrap();
        assert_eq!(sol.diagnostics.status, SolveStatus::Infeasible);
    }

    #[test]
    fn solves_are_deterministic() {
        let (_, problem) = tiny_problem(AssignmentForm::Bordered);
        let a = solve(&problem, &SolveConfig::default()).unwrap();
        let b = solve(&problem, &SolveConfig::default()).unwrap();
        assert_eq!(a.t_star.to_bits(), b.t_star.to_bits());
        assert_eq!(a.gram, b.gram);
        assert_eq!(a.diagnostics.iterations, b.diagnostics.iterations);
    }

    #[test]
    fn iteration_budget_is_honored() {
        let (_, problem) = tiny_problem(AssignmentForm::Bordered);
        let config = SolveConfig {
            max_iter: 3,
            ..SolveConfig::default()
        };
        let sol = solve(&problem, &config).unwrap();
        assert_eq!(sol.diagnostics.status, SolveStatus::MaxIter);
        assert!(sol.t_star.is_finite());
    }
}
