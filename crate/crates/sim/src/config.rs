//! Flat `key = value` config files and the shared value parsers.
//!
//! Keys are the `ExperimentConfig` field names; the command-line spellings
//! (`algo`, `rbar`, `budget`, `eta0`, `baseline_eps`) are accepted as well.
//! Blank lines and lines starting with `#` are ignored. Command-line flags
//! are applied after the file, so they win.

use std::fs;
use std::path::{Path, PathBuf};

use cora_core::domain::{Algorithm, EpsSchedule, ExperimentConfig, ResourceBudget, UsersPerSlot};
use cora_core::environment::{GroundTruth, LabelSampling, ScenarioKind};

use crate::error::{SimError, SimResult};
use crate::floats::parse_f64;

/// Every setting the harness understands, each optional until merged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub scenario: Option<ScenarioKind>,
    pub truth: Option<GroundTruth>,
    pub algorithm: Option<Algorithm>,
    pub theta: Option<f64>,
    pub long_term_avg: Option<Vec<f64>>,
    pub per_slot_cap: Option<Vec<f64>>,
    pub horizon: Option<usize>,
    pub initial_size: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub step_size_base: Option<f64>,
    pub ucb_c: Option<f64>,
    pub baseline_eps_schedule: Option<EpsSchedule>,
    pub users_per_slot: Option<UsersPerSlot>,
    pub classifier_updates: Option<bool>,
    pub nominal_coefficients: Option<bool>,
    pub label_sampling: Option<LabelSampling>,
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub sweep: Option<String>,
}

impl Settings {
    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> SimResult<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "scenario" => self.scenario = Some(parse_scenario(value)?),
            "truth" => self.truth = Some(parse_truth(value)?),
            "algorithm" | "algo" => self.algorithm = Some(parse_algorithm(value)?),
            "theta" => self.theta = Some(parse_number(key, value)?),
            "long_term_avg" | "rbar" => self.long_term_avg = Some(parse_list(key, value)?),
            "per_slot_cap" | "budget" => self.per_slot_cap = Some(parse_list(key, value)?),
            "horizon" => self.horizon = Some(parse_int(key, value)?),
            "initial_size" => self.initial_size = Some(parse_int(key, value)?),
            "trials" => self.trials = Some(parse_int(key, value)?),
            "seed" => self.seed = Some(parse_int(key, value)?),
            "step_size_base" | "eta0" => self.step_size_base = Some(parse_number(key, value)?),
            "ucb_c" => self.ucb_c = Some(parse_number(key, value)?),
            "baseline_eps_schedule" | "baseline_eps" => self.baseline_eps_schedule = Some(parse_eps(value)?),
            "users_per_slot" => self.users_per_slot = Some(parse_users(value)?),
            "classifier_updates" => self.classifier_updates = Some(parse_bool(key, value)?),
            "nominal_coefficients" => self.nominal_coefficients = Some(parse_bool(key, value)?),
            "label_sampling" => self.label_sampling = Some(parse_label_sampling(value)?),
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "sweep" => self.sweep = Some(value.to_string()),
            other => return Err(SimError::usage(format!("unknown setting '{other}'"))),
        }
        Ok(())
    }

    pub fn parse(text: &str, origin: &Path) -> SimResult<Self> {
        let mut settings = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SimError::usage(format!("{}:{}: expected key = value", origin.display(), i + 1))
            })?;
            settings
                .set(key, value)
                .map_err(|e| SimError::usage(format!("{}:{}: {e}", origin.display(), i + 1)))?;
        }
        Ok(settings)
    }

    pub fn from_file(path: &Path) -> SimResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: Settings) -> Settings {
        Settings {
            scenario: over.scenario.or(self.scenario),
            truth: over.truth.or(self.truth),
            algorithm: over.algorithm.or(self.algorithm),
            theta: over.theta.or(self.theta),
            long_term_avg: over.long_term_avg.or(self.long_term_avg),
            per_slot_cap: over.per_slot_cap.or(self.per_slot_cap),
            horizon: over.horizon.or(self.horizon),
            initial_size: over.initial_size.or(self.initial_size),
            trials: over.trials.or(self.trials),
            seed: over.seed.or(self.seed),
            step_size_base: over.step_size_base.or(self.step_size_base),
            ucb_c: over.ucb_c.or(self.ucb_c),
            baseline_eps_schedule: over.baseline_eps_schedule.or(self.baseline_eps_schedule),
            users_per_slot: over.users_per_slot.or(self.users_per_slot),
            classifier_updates: over.classifier_updates.or(self.classifier_updates),
            nominal_coefficients: over.nominal_coefficients.or(self.nominal_coefficients),
            label_sampling: over.label_sampling.or(self.label_sampling),
            dataset: over.dataset.or(self.dataset),
            out: over.out.or(self.out),
            sweep: over.sweep.or(self.sweep),
        }
    }

    /// Scenario defaults with every set field applied, validated.
    pub fn to_config(&self) -> SimResult<ExperimentConfig> {
        let scenario = self
            .scenario
            .ok_or_else(|| SimError::usage("missing --scenario (gaussian, gaussian-hetero or youtube)"))?;
        let mut cfg = ExperimentConfig::for_scenario(scenario);
        let k = scenario.resource_dim();
        if let Some(v) = self.truth {
            cfg.truth = v;
        }
        if let Some(v) = self.algorithm {
            cfg.algorithm = v;
        }
        if let Some(v) = self.theta {
            cfg.theta = v;
        }
        let caps = match &self.per_slot_cap {
            Some(v) => broadcast("budget", v, k)?,
            None => cfg.budget.per_slot_cap.clone(),
        };
        let avg = match &self.long_term_avg {
            Some(v) => broadcast("rbar", v, k)?,
            None => cfg.budget.long_term_avg.clone(),
        };
        cfg.budget = ResourceBudget::new(caps, avg).map_err(|e| SimError::usage(e.to_string()))?;
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = self.initial_size {
            cfg.initial_size = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.step_size_base {
            cfg.step_size_base = v;
        }
        if let Some(v) = self.ucb_c {
            cfg.ucb_c = v;
        }
        if let Some(v) = self.baseline_eps_schedule {
            cfg.baseline_eps_schedule = v;
        }
        if let Some(v) = self.users_per_slot {
            cfg.users_per_slot = v;
        }
        if let Some(v) = self.classifier_updates {
            cfg.classifier_updates = v;
        }
        if let Some(v) = self.nominal_coefficients {
            cfg.nominal_coefficients = v;
        }
        if let Some(v) = self.label_sampling {
            cfg.label_sampling = v;
        }
        if cfg.trials == 0 {
            return Err(SimError::usage("trials must be at least 1"));
        }
        cfg.validate().map_err(|e| SimError::usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn broadcast(name: &str, values: &[f64], k: usize) -> SimResult<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; k]),
        n if n == k => Ok(values.to_vec()),
        n => Err(SimError::usage(format!("--{name} has {n} entries, scenario has {k} resources"))),
    }
}

pub fn parse_scenario(s: &str) -> SimResult<ScenarioKind> {
    s.parse().map_err(|e: cora_core::Error| SimError::usage(e.to_string()))
}

pub fn parse_algorithm(s: &str) -> SimResult<Algorithm> {
    match s {
        "ooqra" => Ok(Algorithm::Ooqra),
        "roqra" => Ok(Algorithm::Roqra),
        "baseline" => Ok(Algorithm::Baseline),
        _ => Err(SimError::usage(format!("unknown algorithm '{s}' (ooqra, roqra, baseline)"))),
    }
}

pub fn parse_truth(s: &str) -> SimResult<GroundTruth> {
    match s.replace('-', "_").as_str() {
        "gaussian_posterior" => Ok(GroundTruth::GaussianPosterior),
        "threshold" => Ok(GroundTruth::Threshold),
        "youtube" => Ok(GroundTruth::Youtube),
        _ => Err(SimError::usage(format!("unknown truth '{s}' (gaussian_posterior, threshold, youtube)"))),
    }
}

pub fn parse_label_sampling(s: &str) -> SimResult<LabelSampling> {
    match s {
        "bernoulli" => Ok(LabelSampling::Bernoulli),
        "threshold" => Ok(LabelSampling::Threshold),
        _ => Err(SimError::usage(format!("unknown label sampling '{s}' (bernoulli, threshold)"))),
    }
}

/// `inv_t`, `inv_log`, `one`, or a fixed step as a number.
pub fn parse_eps(s: &str) -> SimResult<EpsSchedule> {
    match s {
        "inv_t" => Ok(EpsSchedule::InvT),
        "inv_log" => Ok(EpsSchedule::InvLog),
        "one" => Ok(EpsSchedule::Constant(1.0)),
        other => match parse_f64(other) {
            Some(v) if v.is_finite() && v >= 0.0 => Ok(EpsSchedule::Constant(v)),
            _ => Err(SimError::usage(format!("unknown eps schedule '{s}' (inv_t, inv_log, one)"))),
        },
    }
}

/// A fixed count (`3`) or `poisson:MEAN` for `1 + Poisson(MEAN)`.
pub fn parse_users(s: &str) -> SimResult<UsersPerSlot> {
    if let Some(mean) = s.strip_prefix("poisson:") {
        return Ok(UsersPerSlot::Poisson(parse_number("users_per_slot", mean)?));
    }
    Ok(UsersPerSlot::Fixed(parse_int("users_per_slot", s)?))
}

pub fn parse_list(key: &str, s: &str) -> SimResult<Vec<f64>> {
    let values = s
        .split(',')
        .map(|part| parse_f64(part).ok_or_else(|| SimError::usage(format!("{key}: bad number '{part}'"))))
        .collect::<SimResult<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(SimError::usage(format!("{key}: empty list")));
    }
    Ok(values)
}

fn parse_number(key: &str, s: &str) -> SimResult<f64> {
    parse_f64(s).ok_or_else(|| SimError::usage(format!("{key}: bad number '{s}'")))
}

fn parse_int<T: std::str::FromStr>(key: &str, s: &str) -> SimResult<T> {
    s.trim().parse().map_err(|_| SimError::usage(format!("{key}: bad integer '{s}'")))
}

fn parse_bool(key: &str, s: &str) -> SimResult<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(SimError::usage(format!("{key}: expected true or false, found '{s}'"))),
    }
}
