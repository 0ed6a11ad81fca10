//! Independent runs fanned out over a worker pool.
//!
//! Trial `i` of a config with seed `s` runs with seed `s ^ i`, so results do
//! not depend on which worker picks a run up or in what order.

use cora_core::domain::{ExperimentConfig, UserRecord};
use cora_core::engine::{run, summarize, RunSummary, RunTrace};
use cora_core::environment::{Replay, Scenario};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{SimError, SimResult};

pub const THREADS_ENV: &str = "CORA_SIM_THREADS";

/// `CORA_SIM_THREADS` when set to a positive integer, else the number of
/// logical cores.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ trial as u64
}

/// The config of trial `trial`, with its derived seed.
pub fn trial_config(cfg: &ExperimentConfig, trial: usize) -> ExperimentConfig {
    let mut c = cfg.clone();
    c.seed = trial_seed(cfg.seed, trial);
    c.trials = 1;
    c
}

/// One run against the built-in scenario, or against recorded users when
/// `replay` is given.
pub fn run_one(cfg: &ExperimentConfig, replay: Option<&[UserRecord]>) -> cora_core::Result<RunTrace> {
    let scenario = Scenario::new(cfg.scenario, cfg.truth);
    match replay {
        Some(records) => run(cfg, &mut Replay::new(scenario, records.to_vec())?),
        None => run(cfg, &mut scenario.clone()),
    }
}

/// Runs every config (each exactly once, with its own seed) and maps the
/// trace through `f`. Output order matches input order.
pub fn run_many<T, F>(configs: &[ExperimentConfig], replay: Option<&[UserRecord]>, f: F) -> SimResult<Vec<T>>
where
    T: Send,
    F: Fn(usize, RunTrace) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build()?;
    pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| {
                run_one(cfg, replay)
                    .map(|trace| f(i, trace))
                    .map_err(|source| SimError::Trial { trial: i, source })
            })
            .collect()
    })
}

/// All `cfg.trials` trials of one config.
pub fn run_trials<T, F>(cfg: &ExperimentConfig, replay: Option<&[UserRecord]>, f: F) -> SimResult<Vec<T>>
where
    T: Send,
    F: Fn(usize, RunTrace) -> T + Sync,
{
    let configs: Vec<_> = (0..cfg.trials).map(|i| trial_config(cfg, i)).collect();
    run_many(&configs, replay, f)
}

pub fn trial_summaries(cfg: &ExperimentConfig, replay: Option<&[UserRecord]>) -> SimResult<Vec<RunSummary>> {
    run_trials(cfg, replay, |_, trace| summarize(&trace))
}

/// Mean and sample standard deviation of every summary field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub trials: usize,
    pub mean: RunSummary,
    pub std: RunSummary,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn aggregate(summaries: &[RunSummary]) -> Aggregate {
    let scalar = |f: fn(&RunSummary) -> f64| mean_std(&summaries.iter().map(f).collect::<Vec<_>>());
    let k = summaries.first().map_or(0, |s| s.avg_resource_used.len());
    let vector = |f: fn(&RunSummary) -> &Vec<f64>| -> (Vec<f64>, Vec<f64>) {
        (0..k)
            .map(|i| mean_std(&summaries.iter().map(|s| f(s)[i]).collect::<Vec<_>>()))
            .unzip()
    };
    let rate = scalar(|s| s.time_avg_positive_rate);
    let queue = scalar(|s| s.time_avg_queue_length);
    let norm = scalar(|s| s.final_weight_norm);
    let used = vector(|s| &s.avg_resource_used);
    let slack = vector(|s| &s.constraint_slack);
    Aggregate {
        trials: summaries.len(),
        mean: RunSummary {
            time_avg_positive_rate: rate.0,
            time_avg_queue_length: queue.0,
            avg_resource_used: used.0,
            final_weight_norm: norm.0,
            constraint_slack: slack.0,
        },
        std: RunSummary {
            time_avg_positive_rate: rate.1,
            time_avg_queue_length: queue.1,
            avg_resource_used: used.1,
            final_weight_norm: norm.1,
            constraint_slack: slack.1,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn seeds_split_by_trial() {
        assert_eq!(trial_seed(7, 0), 7);
        assert_eq!(trial_seed(7, 1), 6);
        assert_eq!(trial_seed(7, 2), 5);
    }
}
