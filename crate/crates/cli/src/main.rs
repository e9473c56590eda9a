//! `wgp`: simulate biased random graph processes and solve their mean-field
//! equations.
//!
//! Exit status is 0 on success, 2 on a usage error and 1 on any other failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wgp_core::harness::{
    closed_form_selftest, compare_trajectory, output, sampler_selftest, sweep, ClosedFormCheck,
    Fixture, SelftestReport, SweepConfig, Target, DEFAULT_ALPHA,
};
use wgp_core::ode::{find_singularity_with, integrate, OdeParams, SingularityResult};
use wgp_core::{
    Error, ModelKind, ModelSpec, ProcessState, Sampling, Snapshot, StepOutcome, StopCondition,
};

#[derive(Parser, Debug)]
#[command(
    name = "wgp",
    version,
    about = "Biased random graph processes: simulation and ODE analysis"
)]
struct Cli {
    /// Worker threads for trial-parallel commands [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one process and print its observables
    Simulate(SimulateArgs),
    /// Integrate the mean-field equations of the And model
    Ode(OdeArgs),
    /// Locate the blow-up time x_c of the susceptibility equation
    Singularity(SingularityArgs),
    /// Threshold estimates or trajectory comparisons over models and K values
    Sweep(SweepArgs),
    /// One And run against the ODE solution on a time grid
    Compare(CompareArgs),
    /// Chi-square checks of the samplers and closed-form checks of the solver
    Selftest(SelftestArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SamplingArg {
    Exact,
    OrderedPair,
}

impl From<SamplingArg> for Sampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Exact => Sampling::Exact,
            SamplingArg::OrderedPair => Sampling::OrderedPairApprox,
        }
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    output: Format,
    /// Output file [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "and")]
    model: ModelKind,
    #[arg(long, default_value_t = 1.0, value_parser = parse_bias)]
    k: f64,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// connected, isolated-exhausted, edges=M or giant=ALPHA
    #[arg(long, default_value = "connected")]
    stop: StopCondition,
    /// Emit a row every this many edges [default: final row only]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    snapshot_every: Option<u64>,
    #[arg(long, value_enum, default_value_t = SamplingArg::Exact)]
    sampling: SamplingArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct OdeArgs {
    #[arg(long, default_value_t = 1.0, value_parser = parse_bias)]
    k: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Relative and absolute local error tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SingularityArgs {
    #[arg(long, value_parser = parse_bias)]
    k: f64,
    /// Width of the final bisection bracket
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = TargetArg::Giant)]
    target: TargetArg,
    #[arg(long = "model", value_delimiter = ',', default_value = "or,and")]
    models: Vec<ModelKind>,
    #[arg(long = "k", value_delimiter = ',', required = true, value_parser = parse_bias)]
    ks: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SamplingArg::Exact)]
    sampling: SamplingArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Giant,
    Connectivity,
    Trajectory,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Giant => Target::Giant,
            TargetArg::Connectivity => Target::Connectivity,
            TargetArg::Trajectory => Target::Trajectory,
        }
    }
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, value_parser = parse_bias)]
    k: f64,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Comparison times in units of n/2 edges
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long = "k", value_delimiter = ',', default_value = "0,0.5,1,2", value_parser = parse_bias)]
    ks: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    draws: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SamplingArg::Exact)]
    sampling: SamplingArg,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_bias(s: &str) -> Result<f64, String> {
    let k: f64 = s
        .parse()
        .map_err(|e| format!("`{s}` is not a number: {e}"))?;
    if k.is_finite() && k >= 0.0 {
        Ok(k)
    } else {
        Err(format!("K must be finite and non-negative, got {s}"))
    }
}

/// A failure that should exit with status 1 even though it is not an error
/// value, e.g. a self-test that ran but did not pass.
#[derive(Debug)]
struct ChecksFailed(String);

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ChecksFailed {}

fn open_output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Steps `state` until `stop`, handing every `every`-th edge count and the
/// final state to `emit`.
fn drive(
    state: &mut ProcessState,
    stop: StopCondition,
    every: Option<u64>,
    mut emit: impl FnMut(Snapshot) -> wgp_core::Result<()>,
) -> wgp_core::Result<()> {
    let mut last = None;
    while !state.is_satisfied(stop) {
        if let StepOutcome::Edge(..) = state.advance()? {
            let m = state.edge_count();
            if every.is_some_and(|every| m.is_multiple_of(every)) {
                emit(state.snapshot())?;
                last = Some(m);
            }
        }
    }
    if last != Some(state.edge_count()) {
        emit(state.snapshot())?;
    }
    Ok(())
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let model = ModelSpec::new(args.model, args.k, args.sampling.into())?;
    let mut state = ProcessState::new(model, args.n, args.seed)?;
    state.check_stop(args.stop)?;
    let mut out = open_output(&args.out.out)?;
    match args.out.output {
        Format::Csv => {
            let mut w = output::SnapshotWriter::new(&mut out)?;
            drive(&mut state, args.stop, args.snapshot_every, |s| w.write(&s))?;
            w.finish()?;
        }
        Format::Json => {
            let mut rows = Vec::new();
            drive(&mut state, args.stop, args.snapshot_every, |s| {
                rows.push(s);
                Ok(())
            })?;
            output::write_json(&mut out, &rows)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn ode(args: &OdeArgs) -> anyhow::Result<()> {
    let params = OdeParams {
        rel_tol: args.tol,
        abs_tol: args.tol,
        ..OdeParams::new(args.k, args.t_end)
    };
    let traj = integrate(&params)?;
    let mut out = open_output(&args.out.out)?;
    match args.out.output {
        Format::Csv => output::write_trajectory_csv(&mut out, &traj)?,
        Format::Json => output::write_json(&mut out, &traj)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SingularityRecord {
    k: f64,
    #[serde(flatten)]
    result: SingularityResult,
}

fn singularity(args: &SingularityArgs) -> anyhow::Result<()> {
    let result = find_singularity_with(args.k, args.tol, 1e-10, 1e-10)?;
    let mut out = open_output(&args.out.out)?;
    match args.out.output {
        Format::Csv => writeln!(out, "{}", output::fmt_sig(result.x_c))?,
        Format::Json => output::write_json(&mut out, &SingularityRecord { k: args.k, result })?,
    }
    out.flush()?;
    Ok(())
}

fn run_sweep(args: &SweepArgs) -> anyhow::Result<()> {
    let config = SweepConfig {
        models: args.models.clone(),
        ks: args.ks.clone(),
        n: args.n,
        trials: args.trials,
        alpha: args.alpha,
        base_seed: args.seed,
        target: args.target.into(),
        sampling: args.sampling.into(),
    };
    let result = sweep(&config)?;
    let mut out = open_output(&args.out.out)?;
    match (args.out.output, config.target) {
        (Format::Json, _) => output::write_json(&mut out, &result)?,
        (Format::Csv, Target::Trajectory) => {
            output::write_comparison_csv(&mut out, &result.comparisons)?
        }
        (Format::Csv, _) => output::write_estimates_csv(&mut out, &result.rows)?,
    }
    out.flush()?;
    for f in &result.failures {
        eprintln!("cell {} K={} failed: {}", f.model, f.k, f.error);
    }
    if !result.failures.is_empty() {
        return Err(ChecksFailed(format!("{} sweep cells failed", result.failures.len())).into());
    }
    Ok(())
}

fn compare(args: &CompareArgs) -> anyhow::Result<()> {
    let report = compare_trajectory(args.k, args.n, &args.grid, args.seed)?;
    let mut out = open_output(&args.out.out)?;
    match args.out.output {
        Format::Csv => output::write_comparison_csv(&mut out, std::slice::from_ref(&report))?,
        Format::Json => output::write_json(&mut out, &report)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SelftestSummary {
    samplers: Vec<SelftestReport>,
    closed_forms: Vec<ClosedFormCheck>,
}

fn selftest(args: &SelftestArgs) -> anyhow::Result<()> {
    let mut samplers = Vec::new();
    for kind in [ModelKind::Or, ModelKind::And] {
        for &k in &args.ks {
            let model = ModelSpec::new(kind, k, args.sampling.into())?;
            for fixture in Fixture::standard() {
                samplers.push(sampler_selftest(&model, &fixture, args.draws, args.seed)?);
            }
        }
    }
    let closed_forms = closed_form_selftest()?;
    let mut out = open_output(&args.out.out)?;
    match args.out.output {
        Format::Csv => output::write_selftest_csv(&mut out, &samplers)?,
        Format::Json => output::write_json(
            &mut out,
            &SelftestSummary {
                samplers: samplers.clone(),
                closed_forms: closed_forms.clone(),
            },
        )?,
    }
    out.flush()?;
    for c in &closed_forms {
        eprintln!(
            "closed form K={}: max deviation {} on [0, {}] {}",
            c.k,
            output::fmt_sig(c.max_deviation),
            output::fmt_sig(c.t_end),
            if c.passed { "ok" } else { "FAILED" }
        );
    }
    let failed = samplers.iter().filter(|r| !r.passed).count()
        + closed_forms.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(ChecksFailed(format!("{failed} self-test checks failed")).into());
    }
    eprintln!(
        "{} sampler checks and {} closed-form checks passed",
        samplers.len(),
        closed_forms.len()
    );
    Ok(())
}

fn is_usage_error(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<Error>(),
        Some(
            Error::InvalidParameter(_)
                | Error::GridOutOfRange { .. }
                | Error::EmptyGraph
                | Error::VertexOutOfRange { .. }
        )
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ode(a) => ode(a),
        Command::Singularity(a) => singularity(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Compare(a) => compare(a),
        Command::Selftest(a) => selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage_error(&e) { 2 } else { 1 })
        }
    }
}
