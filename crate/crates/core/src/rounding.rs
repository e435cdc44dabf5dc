//! Randomized recovery of schedules from the relaxation output.
//!
//! The pipeline is: draw Gaussian vectors with the solver's second-moment
//! matrix as covariance, keep their signs, repair each sign pattern into a
//! schedule (or reject it), and return the best of `K` by measured
//! bottleneck. Alongside the schedule the report carries the closed-form
//! expectation of the sign quadratic form and the lower/upper objective
//! bounds read off the relaxation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::evaluator;
use crate::model::{Instance, Schedule};
use crate::qcqp::HomogenizedForms;
use crate::sdp::SdpSolution;

/// How to resolve a sample that marks several machines for one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepairPolicy {
    /// Keep the marked machine with the smallest shared-load compute time
    /// plus worst outgoing delay toward tasks whose machines are already
    /// fixed; lowest index on ties.
    #[default]
    GreedyDrop,
    /// Keep the lowest-indexed marked machine.
    FirstMachine,
}

#[derive(Debug, Clone)]
pub struct RoundingConfig {
    /// Number of Gaussian samples to draw (best-of-K selection).
    pub n_samples: usize,
    pub seed: u64,
    pub repair: RepairPolicy,
    /// Tolerance for negative covariance eigenvalues; anything below
    /// `-eig_clamp` is rejected, anything above is clamped to zero.
    pub eig_clamp: f64,
}

impl Default for RoundingConfig {
    fn default() -> RoundingConfig {
        RoundingConfig {
            n_samples: 1000,
            seed: 0,
            repair: RepairPolicy::default(),
            eig_clamp: 1e-7,
        }
    }
}

/// Outcome of rounding one solved relaxation.
#[derive(Debug, Clone)]
pub struct ScheduleReport {
    pub schedule: Schedule,
    /// Measured bottleneck of `schedule`.
    pub achieved_bottleneck: f64,
    /// Closed-form expectation of the worst edge form under sign sampling,
    /// before any repair.
    pub expected_bottleneck: f64,
    /// Relaxation objective: no schedule can beat this.
    pub lower_bound: f64,
    /// Linear majorization of the arcsin expectation, reported as computed.
    pub upper_bound: f64,
    /// How many of the `samples_total` sign patterns survived repair.
    pub samples_feasible: usize,
    pub samples_total: usize,
}

/// Draws `count` sign vectors of `z ~ N(0, cov)`.
///
/// The covariance is factored once through its eigendecomposition with
/// negative eigenvalues clamped to zero (the input is typically rank
/// deficient near optimality, so a Cholesky factor would not exist).
/// Sample `k` uses its own counter-keyed stream of the seeded generator, so
/// the set of samples does not depend on evaluation order. `sign(0)` is
/// `+1`.
pub fn sample_signs(
    cov: &DMatrix<f64>,
    count: usize,
    seed: u64,
    eig_clamp: f64,
) -> Result<Vec<DVector<f64>>, Error> {
    assert_eq!(cov.nrows(), cov.ncols(), "covariance must be square");
    let n = cov.nrows();
    let eig = SymmetricEigen::new(cov.clone());
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min_eig < -eig_clamp {
        return Err(Error::NotPsd(min_eig));
    }
    let mut factor = eig.eigenvectors.clone();
    for (k, mut col) in factor.column_iter_mut().enumerate() {
        col *= eig.eigenvalues[k].max(0.0).sqrt();
    }
    let mut samples = Vec::with_capacity(count);
    for k in 0..count {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let gauss = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let z = &factor * gauss;
        samples.push(z.map(|v| if v >= 0.0 { 1.0 } else { -1.0 }));
    }
    Ok(samples)
}

/// Turns one sign vector into a schedule, or rejects it.
///
/// The vector has length `n_tasks * n_machines + 1`; the trailing coordinate
/// is the homogenization sign, and a `-1` there flips the whole sample (both
/// signs of a vector encode the same assignment). A task marked on no
/// machine rejects the sample; a task marked on several machines keeps one
/// per `policy`. Machines forced by the sample (exactly one mark) are fixed
/// before any choice is made, so greedy choices see them.
pub fn repair(signs: &DVector<f64>, instance: &Instance, policy: RepairPolicy) -> Option<Schedule> {
    let n_tasks = instance.task_graph.n_tasks();
    let n_machines = instance.compute_graph.speed.len();
    assert_eq!(
        signs.len(),
        n_tasks * n_machines + 1,
        "sign vector length must match the homogenized dimension"
    );
    let u = signs[n_tasks * n_machines];
    let marked = |task: usize, machine: usize| signs[machine * n_tasks + task] * u > 0.0;

    let mut fixed: Vec<Option<usize>> = vec![None; n_tasks];
    let mut ambiguous: Vec<(usize, Vec<usize>)> = Vec::new();
    for task in 0..n_tasks {
        let machines: Vec<usize> = (0..n_machines).filter(|&l| marked(task, l)).collect();
        match machines.len() {
            0 => return None,
            1 => fixed[task] = Some(machines[0]),
            _ => ambiguous.push((task, machines)),
        }
    }
    for (task, machines) in ambiguous {
        let choice = match policy {
            RepairPolicy::FirstMachine => machines[0],
            RepairPolicy::GreedyDrop => {
                let mut best = (f64::INFINITY, usize::MAX);
                for &l in &machines {
                    let load: f64 = instance.task_graph.compute[task]
                        + fixed
                            .iter()
                            .enumerate()
                            .filter(|&(_, m)| *m == Some(l))
                            .map(|(r, _)| instance.task_graph.compute[r])
                            .sum::<f64>();
                    let mut delay: f64 = 0.0;
                    for &(a, b) in &instance.task_graph.edges {
                        if a == task {
                            if let Some(mb) = fixed[b] {
                                delay = delay.max(instance.compute_graph.comm[l][mb]);
                            }
                        }
                    }
                    let score = load / instance.compute_graph.speed[l] + delay;
                    if score < best.0 {
                        best = (score, l);
                    }
                }
                best.1
            }
        };
        fixed[task] = Some(choice);
    }
    let assignment: Vec<usize> = fixed.into_iter().map(|m| m.expect("all tasks fixed")).collect();
    Some(Schedule::new(assignment, n_machines).expect("repaired machines are in range"))
}

/// Expectation of the worst edge form over sign vectors of `N(0, x_tilde)`,
/// in time units: `max_e (1/4) (2/pi) sum_{w,v} [Q~_e]_{w,v} asin([X~]_{w,v})`.
///
/// Entries are clamped to the arcsin domain; straying past `1 + 1e-9` in
/// magnitude is an error rather than a clamp.
pub fn expected_bottleneck(forms: &HomogenizedForms, x_tilde: &DMatrix<f64>) -> Result<f64, Error> {
    let n = x_tilde.nrows();
    let mut arcs = DMatrix::zeros(n, n);
    for col in 0..n {
        for row in 0..n {
            let v = x_tilde[(row, col)];
            if v.abs() > 1.0 + 1e-9 {
                return Err(Error::CovarianceOutOfRange { row, col, value: v });
            }
            arcs[(row, col)] = v.clamp(-1.0, 1.0).asin();
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for ef in &forms.edge_forms {
        let sum: f64 = ef.q.iter().zip(arcs.iter()).map(|(q, a)| q * a).sum();
        worst = worst.max(sum * (2.0 / PI) / 4.0);
    }
    Ok(worst)
}

/// Objective bounds read off the solved relaxation.
///
/// The lower bound, `max_e <Q~_e, X~*> / 4`, is valid for every schedule.
/// The upper bound majorizes each arcsin term by `0.112 + 0.878 x`; it is
/// reported exactly as that sum, and callers should treat it as indicative
/// (the majorization argument needs nonnegative weights, which the forms do
/// not always have).
pub fn bounds(forms: &HomogenizedForms, solution: &SdpSolution) -> (f64, f64) {
    let gram = &solution.gram;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for ef in &forms.edge_forms {
        let dot: f64 = ef.q.iter().zip(gram.iter()).map(|(q, x)| q * x).sum();
        lower = lower.max(dot / 4.0);
        let lin: f64 = ef
            .q
            .iter()
            .zip(gram.iter())
            .map(|(q, x)| q * (0.112 + 0.878 * x))
            .sum();
        upper = upper.max(lin);
    }
    (lower, upper)
}

/// Best-of-K randomized rounding of a solved relaxation.
///
/// Draws `config.n_samples` sign vectors, repairs each, and keeps the
/// feasible schedule with the smallest measured bottleneck (earliest sample
/// wins ties). If every sample is rejected the nearest-integer recovery of
/// the border vector is used instead and `samples_feasible` is zero.
pub fn round(
    instance: &Instance,
    forms: &HomogenizedForms,
    solution: &SdpSolution,
    config: &RoundingConfig,
) -> Result<ScheduleReport, Error> {
    if config.n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let samples = sample_signs(&solution.gram, config.n_samples, config.seed, config.eig_clamp)?;
    let mut feasible = 0usize;
    let mut best: Option<(f64, Schedule)> = None;
    for signs in &samples {
        if let Some(schedule) = repair(signs, instance, config.repair) {
            feasible += 1;
            let value = evaluator::bottleneck(instance, &schedule);
            if best.as_ref().map_or(true, |(b, _)| value < *b) {
                best = Some((value, schedule));
            }
        }
    }
    let (achieved_bottleneck, schedule) = match best {
        Some((value, schedule)) => (value, schedule),
        None => {
            let schedule = crate::baselines::naive_round(solution, instance);
            (evaluator::bottleneck(instance, &schedule), schedule)
        }
    };
    let expected_bottleneck = expected_bottleneck(forms, &solution.gram)?;
    let (lower_bound, upper_bound) = bounds(forms, solution);
    Ok(ScheduleReport {
        schedule,
        achieved_bottleneck,
        expected_bottleneck,
        lower_bound,
        upper_bound,
        samples_feasible: feasible,
        samples_total: config.n_samples,
    })
}
