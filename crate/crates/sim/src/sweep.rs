//! One-axis parameter sweeps: `theta=1,5,10`, `rbar=1:20:1`, `budget=...`.

use std::path::Path;

use cora_core::domain::{ExperimentConfig, ResourceBudget, UserRecord};
use cora_core::engine::{summarize, RunSummary};

use crate::error::{SimError, SimResult};
use crate::files::csv_writer;
use crate::floats::{fmt_f64, parse_f64};
use crate::trials::{aggregate, run_many, trial_config};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Theta,
    /// Long-term average limit, applied to every resource.
    Rbar,
    /// Per-slot cap, applied to every resource.
    Budget,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Theta => "theta",
            SweepAxis::Rbar => "rbar",
            SweepAxis::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// `axis=v1,v2,...` or `axis=start:end:step` (end inclusive).
pub fn parse_sweep(spec: &str) -> SimResult<SweepSpec> {
    let (axis, grid) = spec
        .split_once('=')
        .ok_or_else(|| SimError::usage(format!("sweep '{spec}' must look like axis=values")))?;
    let axis = match axis.trim() {
        "theta" => SweepAxis::Theta,
        "rbar" => SweepAxis::Rbar,
        "budget" => SweepAxis::Budget,
        other => return Err(SimError::usage(format!("unknown sweep axis '{other}' (theta, rbar, budget)"))),
    };
    let grid = grid.trim();
    if grid.is_empty() {
        return Err(SimError::usage("sweep grid is empty"));
    }
    let number = |s: &str| parse_f64(s).ok_or_else(|| SimError::usage(format!("bad sweep value '{s}'")));
    let values = if grid.contains(':') {
        let parts: Vec<&str> = grid.split(':').collect();
        let [start, end, step] = parts[..] else {
            return Err(SimError::usage(format!("range '{grid}' must be start:end:step")));
        };
        let (start, end, step) = (number(start)?, number(end)?, number(step)?);
        if !start.is_finite() || !end.is_finite() || !step.is_finite() || step <= 0.0 {
            return Err(SimError::usage(format!("range '{grid}' needs finite bounds and a positive step")));
        }
        let mut values = Vec::new();
        let mut i = 0usize;
        loop {
            let v = start + i as f64 * step;
            if v > end + 1e-9 * step {
                break;
            }
            values.push(v);
            i += 1;
        }
        values
    } else {
        grid.split(',').map(|s| number(s.trim())).collect::<SimResult<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(SimError::usage("sweep grid is empty"));
    }
    Ok(SweepSpec { axis, values })
}

/// `cfg` with the swept parameter set to `value`.
pub fn apply(cfg: &ExperimentConfig, axis: SweepAxis, value: f64) -> SimResult<ExperimentConfig> {
    let mut c = cfg.clone();
    let k = c.budget.len();
    match axis {
        SweepAxis::Theta => c.theta = value,
        SweepAxis::Rbar => {
            c.budget = ResourceBudget::new(c.budget.per_slot_cap.clone(), vec![value; k])
                .map_err(|e| SimError::usage(format!("rbar={value}: {e}")))?
        }
        SweepAxis::Budget => {
            c.budget = ResourceBudget::new(vec![value; k], c.budget.long_term_avg.clone())
                .map_err(|e| SimError::usage(format!("budget={value}: {e}")))?
        }
    }
    c.validate().map_err(|e| SimError::usage(e.to_string()))?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub trials: Vec<RunSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

/// Runs every grid point for `cfg.trials` trials. All runs share one pool.
pub fn run_sweep(cfg: &ExperimentConfig, spec: &SweepSpec, replay: Option<&[UserRecord]>) -> SimResult<SweepResult> {
    let points: Vec<ExperimentConfig> = spec
        .values
        .iter()
        .map(|&v| apply(cfg, spec.axis, v))
        .collect::<SimResult<_>>()?;
    let jobs: Vec<ExperimentConfig> = points
        .iter()
        .flat_map(|p| (0..cfg.trials).map(move |i| trial_config(p, i)))
        .collect();
    let mut summaries = run_many(&jobs, replay, |_, trace| summarize(&trace))?.into_iter();
    let points = spec
        .values
        .iter()
        .map(|&value| SweepPoint {
            value,
            trials: summaries.by_ref().take(cfg.trials).collect(),
        })
        .collect();
    Ok(SweepResult { axis: spec.axis, points })
}

fn summary_columns(k: usize) -> Vec<String> {
    let mut cols = vec!["time_avg_positive_rate".to_string(), "time_avg_queue_length".to_string()];
    cols.extend((1..=k).map(|i| format!("avg_resource_used_{i}")));
    cols.push("final_weight_norm".into());
    cols.extend((1..=k).map(|i| format!("constraint_slack_{i}")));
    cols
}

fn summary_values(s: &RunSummary) -> Vec<f64> {
    let mut v = vec![s.time_avg_positive_rate, s.time_avg_queue_length];
    v.extend(&s.avg_resource_used);
    v.push(s.final_weight_norm);
    v.extend(&s.constraint_slack);
    v
}

/// Writes `sweep_trials.csv` (one row per grid point and trial) and
/// `sweep_summary.csv` (mean and sample std per grid point).
pub fn write_sweep(dir: &Path, result: &SweepResult) -> SimResult<()> {
    let k = result
        .points
        .first()
        .and_then(|p| p.trials.first())
        .map_or(0, |s| s.avg_resource_used.len());
    let cols = summary_columns(k);
    let axis = result.axis.name();

    let path = dir.join("sweep_trials.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec![axis.to_string(), "trial".to_string()];
    header.extend(cols.iter().cloned());
    w.write_record(&header).map_err(|e| SimError::csv(&path, e))?;
    for p in &result.points {
        for (trial, s) in p.trials.iter().enumerate() {
            let mut row = vec![fmt_f64(p.value), trial.to_string()];
            row.extend(summary_values(s).into_iter().map(fmt_f64));
            w.write_record(&row).map_err(|e| SimError::csv(&path, e))?;
        }
    }
    w.flush().map_err(|e| SimError::io(&path, e))?;

    let path = dir.join("sweep_summary.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec![axis.to_string(), "trials".to_string()];
    for c in &cols {
        header.push(format!("{c}_mean"));
        header.push(format!("{c}_std"));
    }
    w.write_record(&header).map_err(|e| SimError::csv(&path, e))?;
    for p in &result.points {
        let agg = aggregate(&p.trials);
        let mut row = vec![fmt_f64(p.value), agg.trials.to_string()];
        for (m, s) in summary_values(&agg.mean).into_iter().zip(summary_values(&agg.std)) {
            row.push(fmt_f64(m));
            row.push(fmt_f64(s));
        }
        w.write_record(&row).map_err(|e| SimError::csv(&path, e))?;
    }
    w.flush().map_err(|e| SimError::io(&path, e))
}
