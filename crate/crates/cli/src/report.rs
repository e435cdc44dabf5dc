//! Method dispatch and CSV row assembly shared by `schedule` and `bench`.

use std::time::Instant;

use bsched_core::baselines;
use bsched_core::evaluator;
use bsched_core::qcqp::{self, HomogenizedForms};
use bsched_core::rounding::{self, RepairPolicy, RoundingConfig};
use bsched_core::sdp::{self, AssignmentForm, SdpProblem, SdpSolution, SolveConfig, SolveStatus};
use bsched_core::{Error, Instance};

/// Column order is part of the output contract; reruns with identical flags
/// must produce identical bytes (modulo `solve_ms`, which `--deterministic`
/// blanks).
pub const HEADER: &str = "method,seed,n_tasks,n_machines,degree_lo,degree_hi,bottleneck,\
lower_bound,upper_bound,expected_bottleneck,samples_feasible,solve_ms,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Solve the relaxation, round with Gaussian sign samples, keep the best.
    SdpRr,
    /// Solve the relaxation, assign each task to its strongest coordinate.
    SdpNaive,
    Heft,
    TpHeft,
    /// Sorted demand/speed pairing; needs an edge-free instance.
    Greedy,
    /// Exhaustive search below the assignment-count cap.
    Brute,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::SdpRr => "sdp-rr",
            Method::SdpNaive => "sdp-naive",
            Method::Heft => "heft",
            Method::TpHeft => "tp-heft",
            Method::Greedy => "greedy",
            Method::Brute => "brute",
        }
    }
}

/// Flag bundle forwarded from either subcommand to the method runner.
#[derive(Debug, Clone, Copy)]
pub struct MethodOpts {
    pub samples: usize,
    pub seed: u64,
    pub form: AssignmentForm,
    pub repair: RepairPolicy,
    pub limit: u128,
}

/// Caches the relaxation solve so `sdp-rr` and `sdp-naive` on the same
/// instance pay for it once.
#[derive(Default)]
pub struct SdpCache(Option<SdpState>);

struct SdpState {
    forms: HomogenizedForms,
    solution: SdpSolution,
}

impl SdpState {
    fn status_str(&self) -> &'static str {
        match self.solution.diagnostics.status {
            SolveStatus::MaxIter => "max-iter",
            _ => "ok",
        }
    }
}

impl SdpCache {
    fn state(&mut self, instance: &Instance, form: AssignmentForm) -> Result<&SdpState, Error> {
        if self.0.is_none() {
            let quad = qcqp::build_forms(instance)?;
            let forms = qcqp::homogenize(&quad);
            let problem = SdpProblem::from_forms(&forms, form);
            let solution = sdp::solve(&problem, &SolveConfig::default())?;
            self.0 = Some(SdpState { forms, solution });
        }
        let state = self.0.as_ref().unwrap();
        if state.solution.diagnostics.status == SolveStatus::Infeasible {
            // A valid instance always admits assignments, so this is a
            // numerical breakdown, not a property of the input.
            return Err(Error::Solver(
                "relaxation reported its affine constraints inconsistent".into(),
            ));
        }
        Ok(state)
    }
}

/// Everything a success row reports beyond the instance dimensions.
pub struct Outcome {
    pub bottleneck: f64,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub expected: Option<f64>,
    pub samples_feasible: Option<usize>,
    pub status: &'static str,
}

impl Outcome {
    fn plain(bottleneck: f64) -> Outcome {
        Outcome {
            bottleneck,
            lower_bound: None,
            upper_bound: None,
            expected: None,
            samples_feasible: None,
            status: "ok",
        }
    }
}

pub fn run_method(
    method: Method,
    instance: &Instance,
    opts: &MethodOpts,
    cache: &mut SdpCache,
) -> Result<Outcome, Error> {
    match method {
        Method::Heft | Method::TpHeft => {
            let dag = baselines::dag_convert(&instance.task_graph);
            let schedule = match method {
                Method::Heft => baselines::heft(instance, &dag),
                _ => baselines::tp_heft(instance, &dag),
            };
            Ok(Outcome::plain(evaluator::bottleneck(instance, &schedule)))
        }
        Method::Greedy => {
            let schedule = baselines::greedy_sorted(instance)?;
            Ok(Outcome::plain(evaluator::bottleneck(instance, &schedule)))
        }
        Method::Brute => {
            let (_, value) = baselines::brute_force(instance, opts.limit)?;
            Ok(Outcome::plain(value))
        }
        Method::SdpNaive => {
            let state = cache.state(instance, opts.form)?;
            let schedule = baselines::naive_round(&state.solution, instance);
            let (lower, _) = rounding::bounds(&state.forms, &state.solution);
            Ok(Outcome {
                bottleneck: evaluator::bottleneck(instance, &schedule),
                lower_bound: Some(lower),
                upper_bound: None,
                expected: None,
                samples_feasible: None,
                status: state.status_str(),
            })
        }
        Method::SdpRr => {
            let state = cache.state(instance, opts.form)?;
            let config = RoundingConfig {
                n_samples: opts.samples,
                seed: opts.seed,
                repair: opts.repair,
                ..RoundingConfig::default()
            };
            let report = rounding::round(instance, &state.forms, &state.solution, &config)?;
            Ok(Outcome {
                bottleneck: report.achieved_bottleneck,
                lower_bound: Some(report.lower_bound),
                upper_bound: Some(report.upper_bound),
                expected: Some(report.expected_bottleneck),
                samples_feasible: Some(report.samples_feasible),
                status: state.status_str(),
            })
        }
    }
}

/// Runs one method and renders its CSV row. Failures become an error row
/// with blank numeric cells; the error is also handed back so single-method
/// mode can turn it into a nonzero exit instead.
pub fn method_row(
    instance: &Instance,
    method: Method,
    seed: u64,
    opts: &MethodOpts,
    deterministic: bool,
    cache: &mut SdpCache,
) -> (String, Option<Error>) {
    let start = Instant::now();
    match run_method(method, instance, opts, cache) {
        Ok(outcome) => {
            let elapsed = if deterministic {
                String::new()
            } else {
                start.elapsed().as_millis().to_string()
            };
            let cells = [
                method.name().to_string(),
                seed.to_string(),
                instance.n_tasks().to_string(),
                instance.n_machines().to_string(),
                meta_cell(instance, "degree_lo"),
                meta_cell(instance, "degree_hi"),
                outcome.bottleneck.to_string(),
                opt_cell(outcome.lower_bound),
                opt_cell(outcome.upper_bound),
                opt_cell(outcome.expected),
                outcome.samples_feasible.map(|n| n.to_string()).unwrap_or_default(),
                elapsed,
                outcome.status.to_string(),
            ];
            (csv_line(&cells), None)
        }
        Err(error) => {
            let cells = [
                method.name().to_string(),
                seed.to_string(),
                instance.n_tasks().to_string(),
                instance.n_machines().to_string(),
                meta_cell(instance, "degree_lo"),
                meta_cell(instance, "degree_hi"),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                format!("error: {error}"),
            ];
            (csv_line(&cells), Some(error))
        }
    }
}

/// Error row for a sweep point whose instance could not even be generated.
pub fn instance_error_row(
    method: Method,
    seed: u64,
    n_tasks: usize,
    n_machines: usize,
    error: &Error,
) -> String {
    let mut cells = [const { String::new() }; 13];
    cells[0] = method.name().to_string();
    cells[1] = seed.to_string();
    cells[2] = n_tasks.to_string();
    cells[3] = n_machines.to_string();
    cells[12] = format!("error: {error}");
    csv_line(&cells)
}

fn meta_cell(instance: &Instance, key: &str) -> String {
    instance.metadata.get(key).cloned().unwrap_or_default()
}

fn opt_cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Joins cells after stripping the characters that would break the
/// one-line-per-row format.
fn csv_line(cells: &[String]) -> String {
    cells
        .iter()
        .map(|cell| sanitize(cell))
        .collect::<Vec<_>>()
        .join(",")
}

fn sanitize(cell: &str) -> String {
    cell.replace(',', ";").replace(['\n', '\r'], " ")
}
