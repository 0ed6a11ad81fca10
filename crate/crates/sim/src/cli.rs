//! `cora-sim` subcommands. Exit status: 0 success, 1 failed check or runtime
//! error, 2 bad flags or config.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use cora_core::domain::{ExperimentConfig, UserRecord};
use cora_core::engine::{summarize, RunSummary};
use cora_core::environment::{gen_gaussian_dataset, gen_youtube_dataset, ScenarioKind};
use serde::Serialize;

use crate::config::{parse_scenario, Settings};
use crate::error::{SimError, SimResult};
use crate::files::{ensure_dir, load_dataset, save_dataset, write_json, write_trace};
use crate::floats::fmt_f64;
use crate::oracle::{run_suite, DEFAULT_GRID_STEP, DEFAULT_INSTANCES};
use crate::sweep::{parse_sweep, run_sweep, write_sweep};
use crate::trials::{aggregate, run_trials, Aggregate};

#[derive(Debug, Parser)]
#[command(name = "cora-sim", version, about = "Closed-loop QoE-aware resource allocation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm on one scenario for a number of trials.
    Run(ExperimentArgs),
    /// Repeat a run over a grid of one parameter.
    Sweep(ExperimentArgs),
    /// Compare the per-slot solver with exhaustive grid search.
    OracleCheck(OracleArgs),
    /// Write a synthetic dataset as CSV.
    Dataset(DatasetArgs),
}

#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    /// gaussian, gaussian-hetero or youtube
    #[arg(long)]
    pub scenario: Option<String>,
    /// ooqra, roqra or baseline
    #[arg(long)]
    pub algo: Option<String>,
    #[arg(long)]
    pub theta: Option<String>,
    /// Long-term average limit per resource (comma list)
    #[arg(long)]
    pub rbar: Option<String>,
    /// Per-slot cap per resource (comma list, `inf` allowed)
    #[arg(long)]
    pub budget: Option<String>,
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub initial_size: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Base classifier step size
    #[arg(long)]
    pub eta0: Option<String>,
    /// UCB exploration coefficient
    #[arg(long)]
    pub ucb_c: Option<String>,
    /// inv_t, inv_log or one
    #[arg(long)]
    pub baseline_eps: Option<String>,
    /// gaussian_posterior, threshold or youtube
    #[arg(long)]
    pub truth: Option<String>,
    /// Users per slot: a count, or poisson:MEAN for 1 + Poisson(MEAN)
    #[arg(long)]
    pub users_per_slot: Option<String>,
    /// bernoulli or threshold
    #[arg(long)]
    pub label_sampling: Option<String>,
    /// Keep the initial classifier fit for the whole run
    #[arg(long)]
    pub freeze_classifier: bool,
    /// In the heterogeneous scenario, plan OOQRA and the baseline with the mean coefficients
    #[arg(long)]
    pub nominal_coefficients: bool,
    /// Replay users from a CSV dataset (x1,...,xD,label) instead of sampling them
    #[arg(long)]
    pub dataset: Option<String>,
    /// Sweep spec, e.g. theta=1,5,10 or rbar=1:20:1
    #[arg(long)]
    pub sweep: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<String>,
    /// Flat key = value file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ExperimentArgs {
    fn settings(&self) -> SimResult<Settings> {
        let base = match &self.config {
            Some(path) => Settings::from_file(path).map_err(|e| match e {
                SimError::Io { path, source } => SimError::usage(format!("{}: {source}", path.display())),
                other => other,
            })?,
            None => Settings::default(),
        };
        let mut flags = Settings::default();
        let pairs = [
            ("scenario", &self.scenario),
            ("algo", &self.algo),
            ("theta", &self.theta),
            ("rbar", &self.rbar),
            ("budget", &self.budget),
            ("horizon", &self.horizon),
            ("initial_size", &self.initial_size),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("eta0", &self.eta0),
            ("ucb_c", &self.ucb_c),
            ("baseline_eps", &self.baseline_eps),
            ("truth", &self.truth),
            ("users_per_slot", &self.users_per_slot),
            ("label_sampling", &self.label_sampling),
            ("dataset", &self.dataset),
            ("sweep", &self.sweep),
            ("out", &self.out),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v)?;
            }
        }
        if self.freeze_classifier {
            flags.classifier_updates = Some(false);
        }
        if self.nominal_coefficients {
            flags.nominal_coefficients = Some(true);
        }
        Ok(base.overlay(flags))
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = DEFAULT_INSTANCES)]
    pub instances: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the full report as JSON here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// gaussian or youtube
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let SimError::Usage(_) = e {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> SimResult<()> {
    match command {
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::OracleCheck(args) => cmd_oracle_check(&args),
        Command::Dataset(args) => cmd_dataset(&args),
    }
}

struct Job {
    config: ExperimentConfig,
    replay: Option<Vec<UserRecord>>,
    out: PathBuf,
    sweep: Option<String>,
}

fn prepare(args: &ExperimentArgs) -> SimResult<Job> {
    let settings = args.settings()?;
    let config = settings.to_config()?;
    let replay = match &settings.dataset {
        Some(path) => Some(load_dataset(path)?),
        None => None,
    };
    let out = settings.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    Ok(Job {
        config,
        replay,
        out,
        sweep: settings.sweep,
    })
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a ExperimentConfig,
    per_trial: &'a [RunSummary],
    #[serde(flatten)]
    aggregate: &'a Aggregate,
}

pub fn cmd_run(args: &ExperimentArgs) -> SimResult<()> {
    let job = prepare(args)?;
    let traces = run_trials(&job.config, job.replay.as_deref(), |_, trace| trace)?;
    ensure_dir(&job.out)?;
    let mut summaries = Vec::with_capacity(traces.len());
    for (trial, trace) in traces.iter().enumerate() {
        write_trace(&job.out.join(format!("trace_{trial}.csv")), trace)?;
        summaries.push(summarize(trace));
    }
    let agg = aggregate(&summaries);
    write_json(
        &job.out.join("summary.json"),
        &RunReport {
            config: &job.config,
            per_trial: &summaries,
            aggregate: &agg,
        },
    )?;
    print_aggregate(&agg);
    println!("wrote {} trace(s) and summary.json to {}", traces.len(), job.out.display());
    Ok(())
}

pub fn cmd_sweep(args: &ExperimentArgs) -> SimResult<()> {
    let job = prepare(args)?;
    let spec = job
        .sweep
        .as_deref()
        .ok_or_else(|| SimError::usage("sweep needs --sweep, e.g. theta=1,5,10,40,100"))?;
    let spec = parse_sweep(spec)?;
    let result = run_sweep(&job.config, &spec, job.replay.as_deref())?;
    ensure_dir(&job.out)?;
    write_sweep(&job.out, &result)?;
    write_json(&job.out.join("sweep_config.json"), &job.config)?;
    for p in &result.points {
        let agg = aggregate(&p.trials);
        println!(
            "{}={}  positive_rate={} queue={}",
            spec.axis.name(),
            fmt_f64(p.value),
            fmt_f64(agg.mean.time_avg_positive_rate),
            fmt_f64(agg.mean.time_avg_queue_length)
        );
    }
    println!("wrote sweep_trials.csv and sweep_summary.csv to {}", job.out.display());
    Ok(())
}

pub fn cmd_oracle_check(args: &OracleArgs) -> SimResult<()> {
    if args.instances == 0 {
        return Err(SimError::usage("--instances must be at least 1"));
    }
    if !args.grid_step.is_finite() || args.grid_step <= 0.0 {
        return Err(SimError::usage("--grid-step must be positive"));
    }
    let report = run_suite(args.instances, args.grid_step, args.seed)?;
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    println!(
        "instances={} grid_step={} seed={} max_gap={} max_kkt_residual={}",
        report.instances,
        fmt_f64(report.grid_step),
        report.seed,
        fmt_f64(report.max_gap),
        fmt_f64(report.max_kkt_residual)
    );
    if report.passed() {
        return Ok(());
    }
    let worst = report
        .failures
        .iter()
        .max_by(|a, b| a.gap.total_cmp(&b.gap))
        .expect("failures are nonempty");
    eprintln!("offending instance:\n{}", crate::floats::to_json_string(worst)?);
    Err(SimError::CheckFailed(format!(
        "{} of {} instances failed",
        report.failures.len(),
        report.instances
    )))
}

pub fn cmd_dataset(args: &DatasetArgs) -> SimResult<()> {
    let records = match parse_scenario(&args.scenario)? {
        ScenarioKind::Youtube => gen_youtube_dataset(args.n, args.seed),
        _ => gen_gaussian_dataset(args.n, args.seed),
    }
    .map_err(|e| SimError::usage(e.to_string()))?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    save_dataset(&args.out, &records)?;
    println!("wrote {} records to {}", records.len(), display(&args.out));
    Ok(())
}

fn print_aggregate(agg: &Aggregate) {
    println!(
        "trials={} positive_rate={} (std {}) queue={} resource={:?} slack={:?}",
        agg.trials,
        fmt_f64(agg.mean.time_avg_positive_rate),
        fmt_f64(agg.std.time_avg_positive_rate),
        fmt_f64(agg.mean.time_avg_queue_length),
        agg.mean.avg_resource_used.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>(),
        agg.mean.constraint_slack.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>(),
    );
}

fn display(path: &Path) -> String {
    path.display().to_string()
}
