//! Command-line front end for the scheduler library.
//!
//! Three subcommands: `gen` writes random instances as JSON, `schedule`
//! runs selected methods on one instance file, and `bench` sweeps task
//! counts or degree bands across seeded replicates, emitting long-format
//! CSV and optionally a static SVG line plot.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error (unreadable or
//! invalid inputs, unmet method preconditions), 4 numerical failure.

mod plot;
mod report;
mod sweep;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bsched_core::baselines::DEFAULT_BRUTE_FORCE_LIMIT;
use bsched_core::rounding::RepairPolicy;
use bsched_core::sdp::AssignmentForm;
use bsched_core::sim::{self, Profile, DEFAULT_DEGREE_BAND};
use bsched_core::{Error, Instance};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use report::{Method, MethodOpts, SdpCache, HEADER};

#[derive(Parser)]
#[command(name = "bsched", version, about = "Bottleneck-minimizing task assignment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Gen(GenArgs),
    /// Run one or more methods on an instance file and emit CSV rows.
    Schedule(ScheduleArgs),
    /// Sweep task counts or degree bands across seeds and methods.
    Bench(BenchArgs),
}

#[derive(clap::Args)]
struct GenArgs {
    /// Instance family.
    #[arg(long, value_enum, default_value_t = ProfileArg::HalfNormal)]
    profile: ProfileArg,
    /// Number of tasks (users for gossip-fl).
    #[arg(long)]
    tasks: usize,
    /// Number of machines.
    #[arg(long)]
    machines: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inclusive out-degree lower bound; only with --profile degree-band.
    #[arg(long)]
    degree_lo: Option<usize>,
    /// Inclusive out-degree upper bound; only with --profile degree-band.
    #[arg(long)]
    degree_hi: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    /// Half-normal demands, speeds and delays; out-degrees 2 or 3.
    HalfNormal,
    /// Half-normal magnitudes with an explicit out-degree band.
    DegreeBand,
    /// Gossip-style federated learning round: unit demands, equal machines.
    GossipFl,
}

#[derive(clap::Args)]
struct ScheduleArgs {
    /// Path to an instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated methods to run.
    #[arg(long, value_delimiter = ',', required = true)]
    method: Vec<Method>,
    /// Gaussian sign samples drawn by sdp-rr.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Seed for the rounding sampler; also recorded in the seed column.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Assignment-constraint shape of the relaxation.
    #[arg(long, value_enum, default_value_t = FormArg::Bordered)]
    form: FormArg,
    /// Repair rule for samples that mark several machines for one task.
    #[arg(long, value_enum, default_value_t = RepairArg::GreedyDrop)]
    repair: RepairArg,
    /// Assignment-count cap for brute.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_LIMIT as u64)]
    limit: u64,
    /// Blank the solve_ms column so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Task-count sweep: `21`, `9,12,15`, or inclusive range `9..30:3`.
    #[arg(long, default_value = "21")]
    tasks: String,
    #[arg(long, default_value_t = 4)]
    machines: usize,
    /// Degree-band sweep such as `2:3,4:5,6:7` at a fixed task count;
    /// --tasks must then be a single value.
    #[arg(long)]
    degrees: Option<String>,
    /// Comma-separated methods to run at every sweep point.
    #[arg(long, value_delimiter = ',', default_value = "heft,tp-heft,sdp-naive,sdp-rr")]
    methods: Vec<Method>,
    /// Seeded replicates per sweep point.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Replicate k draws its instance (and rounding) from seed-base + k.
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Gaussian sign samples drawn by sdp-rr.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Assignment-constraint shape of the relaxation.
    #[arg(long, value_enum, default_value_t = FormArg::Bordered)]
    form: FormArg,
    /// Repair rule for samples that mark several machines for one task.
    #[arg(long, value_enum, default_value_t = RepairArg::GreedyDrop)]
    repair: RepairArg,
    /// Assignment-count cap for brute.
    #[arg(long, default_value_t = DEFAULT_BRUTE_FORCE_LIMIT as u64)]
    limit: u64,
    /// Blank the solve_ms column so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a median-bottleneck line plot to this SVG path.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Lifted,
    Bordered,
}

impl From<FormArg> for AssignmentForm {
    fn from(arg: FormArg) -> AssignmentForm {
        match arg {
            FormArg::Lifted => AssignmentForm::Lifted,
            FormArg::Bordered => AssignmentForm::Bordered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RepairArg {
    GreedyDrop,
    FirstMachine,
}

impl From<RepairArg> for RepairPolicy {
    fn from(arg: RepairArg) -> RepairPolicy {
        match arg {
            RepairArg::GreedyDrop => RepairPolicy::GreedyDrop,
            RepairArg::FirstMachine => RepairPolicy::FirstMachine,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Schedule(args) => cmd_schedule(args),
        Command::Bench(args) => cmd_bench(args),
    };
    if let Err(error) = result {
        eprintln!("error: {error}");
        std::process::exit(exit_code(&error));
    }
}

/// 4 for numerical failures inside the solver or sampler, 3 for everything
/// the inputs caused (usage errors exit 2 through clap before this).
fn exit_code(error: &Error) -> i32 {
    match error {
        Error::NotPsd(_) | Error::CovarianceOutOfRange { .. } | Error::Solver(_) => 4,
        _ => 3,
    }
}

/// Reports an invalid flag combination the derive rules cannot express.
fn usage(message: &str) -> ! {
    Cli::command().error(ErrorKind::InvalidValue, message).exit()
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let band_given = args.degree_lo.is_some() || args.degree_hi.is_some();
    if args.profile != ProfileArg::DegreeBand && band_given {
        usage("--degree-lo/--degree-hi apply only to --profile degree-band");
    }
    let instance = match args.profile {
        ProfileArg::HalfNormal => {
            sim::gen_random(args.tasks, args.machines, args.seed, Profile::HalfNormal)?
        }
        ProfileArg::DegreeBand => {
            let (Some(lo), Some(hi)) = (args.degree_lo, args.degree_hi) else {
                usage("--profile degree-band needs both --degree-lo and --degree-hi");
            };
            sim::gen_random(
                args.tasks,
                args.machines,
                args.seed,
                Profile::DegreeBand { lo, hi },
            )?
        }
        ProfileArg::GossipFl => sim::gen_gossip_fl(args.tasks, args.machines, args.seed)?,
    };
    match &args.out {
        Some(path) => {
            instance.save(path)?;
            println!("{}", path.display());
        }
        None => println!("{}", instance.to_json()),
    }
    Ok(())
}

fn cmd_schedule(args: ScheduleArgs) -> Result<(), Error> {
    let instance = Instance::load(&args.instance)?;
    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(violations.join("; ")));
    }
    let opts = MethodOpts {
        samples: args.samples,
        seed: args.seed,
        form: args.form.into(),
        repair: args.repair.into(),
        limit: args.limit as u128,
    };
    let single = args.method.len() == 1;
    let mut cache = SdpCache::default();
    let mut lines = vec![HEADER.to_string()];
    for &method in &args.method {
        let (line, error) = report::method_row(
            &instance,
            method,
            args.seed,
            &opts,
            args.deterministic,
            &mut cache,
        );
        // Sweeps degrade failures to error rows; a single requested method
        // surfaces its failure as the process result instead.
        if single {
            if let Some(error) = error {
                return Err(error);
            }
        }
        lines.push(line);
    }
    write_lines(args.out.as_deref(), &lines)
}

/// One sweep point: generated instances share a task count and profile.
struct SweepPoint {
    n_tasks: usize,
    profile: Profile,
    /// Position on the plot's x axis (task count or band lower bound).
    x: f64,
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let tasks = match sweep::parse_counts(&args.tasks) {
        Ok(tasks) => tasks,
        Err(error) => usage(&error.to_string()),
    };
    let points: Vec<SweepPoint> = match &args.degrees {
        Some(expr) => {
            let bands = match sweep::parse_bands(expr) {
                Ok(bands) => bands,
                Err(error) => usage(&error.to_string()),
            };
            if tasks.len() != 1 {
                usage("a degree sweep needs a single --tasks value");
            }
            let n_tasks = tasks[0];
            for &(_, hi) in &bands {
                if hi >= n_tasks {
                    usage(&format!(
                        "degree band upper bound {hi} needs more than {hi} tasks, got {n_tasks}"
                    ));
                }
            }
            bands
                .into_iter()
                .map(|(lo, hi)| SweepPoint {
                    n_tasks,
                    profile: Profile::DegreeBand { lo, hi },
                    x: lo as f64,
                })
                .collect()
        }
        None => {
            for &n_tasks in &tasks {
                if n_tasks <= DEFAULT_DEGREE_BAND.1 {
                    usage(&format!(
                        "the default degree band needs more than {} tasks, got {n_tasks}",
                        DEFAULT_DEGREE_BAND.1
                    ));
                }
            }
            tasks
                .iter()
                .map(|&n_tasks| SweepPoint {
                    n_tasks,
                    profile: Profile::HalfNormal,
                    x: n_tasks as f64,
                })
                .collect()
        }
    };
    if points.is_empty() || args.methods.is_empty() || args.seeds == 0 {
        usage("empty sweep: need at least one point, one method and one seed");
    }

    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|pi| (0..args.seeds).map(move |k| (pi, args.seed_base + k)))
        .collect();

    let threads: usize = std::env::var("BSCHED_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("BSCHED_THREADS: {e}")))?;

    // Keyed by (point, method, seed) so the parallel collection order never
    // reaches the output.
    let mut keyed: Vec<((usize, usize, u64), String)> = pool.install(|| {
        jobs.par_iter()
            .flat_map(|&(pi, seed)| {
                let point = &points[pi];
                let mut rows = Vec::with_capacity(args.methods.len());
                match sim::gen_random(point.n_tasks, args.machines, seed, point.profile) {
                    Ok(instance) => {
                        let mut cache = SdpCache::default();
                        let opts = MethodOpts {
                            samples: args.samples,
                            seed,
                            form: args.form.into(),
                            repair: args.repair.into(),
                            limit: args.limit as u128,
                        };
                        for (mi, &method) in args.methods.iter().enumerate() {
                            let (line, _) = report::method_row(
                                &instance,
                                method,
                                seed,
                                &opts,
                                args.deterministic,
                                &mut cache,
                            );
                            rows.push(((pi, mi, seed), line));
                        }
                    }
                    Err(error) => {
                        for (mi, &method) in args.methods.iter().enumerate() {
                            let line = report::instance_error_row(
                                method,
                                seed,
                                point.n_tasks,
                                args.machines,
                                &error,
                            );
                            rows.push(((pi, mi, seed), line));
                        }
                    }
                }
                rows
            })
            .collect()
    });
    keyed.sort_by(|a, b| a.0.cmp(&b.0));

    if let Some(path) = &args.plot {
        let svg = render_plot(&args, &points, &keyed);
        std::fs::write(path, svg)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }

    let mut lines = Vec::with_capacity(keyed.len() + 1);
    lines.push(HEADER.to_string());
    lines.extend(keyed.into_iter().map(|(_, line)| line));
    write_lines(args.out.as_deref(), &lines)
}

/// Median bottleneck per (point, method) across seeds; error rows (blank
/// bottleneck cell) drop out of the aggregation.
fn render_plot(
    args: &BenchArgs,
    points: &[SweepPoint],
    keyed: &[((usize, usize, u64), String)],
) -> String {
    let mut values: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for &((pi, mi, _), ref line) in keyed {
        if let Some(v) = line.split(',').nth(6).and_then(|cell| cell.parse::<f64>().ok()) {
            values.entry((mi, pi)).or_default().push(v);
        }
    }
    let series: Vec<plot::Series> = args
        .methods
        .iter()
        .enumerate()
        .map(|(mi, method)| plot::Series {
            label: method.name().to_string(),
            points: (0..points.len())
                .filter_map(|pi| {
                    values
                        .get_mut(&(mi, pi))
                        .map(|group| (points[pi].x, median(group)))
                })
                .collect(),
        })
        .collect();
    let (title, x_label) = if args.degrees.is_some() {
        ("bottleneck vs out-degree", "out-degree band lower bound")
    } else {
        ("bottleneck vs task count", "tasks")
    };
    plot::line_plot(title, x_label, "median bottleneck", &series)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn write_lines(path: Option<&Path>, lines: &[String]) -> Result<(), Error> {
    let mut content = lines.join("\n");
    content.push('\n');
    match path {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
