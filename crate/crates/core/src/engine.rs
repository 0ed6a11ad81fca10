//! The closed loops.
//!
//! Every slot runs in the same order: draw the user(s), allocate with the
//! previous slot's classifier and queues, let the user experience the
//! allocation, then update the dataset, the classifier, the bandit and the
//! queues. Three planners share that loop:
//!
//! - OOQRA plans with the true coefficient matrix (or its mean, if asked).
//! - ROQRA plans with the UCB estimate and records the features the estimate
//!   predicts, while the label still reflects the true effect.
//! - The baseline replaces the virtual queues with dual prices that follow
//!   an `ε`-step ascent and weighs the penalty with `θ = 1`. It is a
//!   reconstruction of a perturbed dual method, not a published algorithm.
//!
//! Runs check their own invariants (box constraints, the per-slot drift
//! bound and the telescoping queue bound) and fail with the offending slot.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_distr::{Distribution, Poisson};

use crate::allocator::{build_slot_problem, per_slot_objective, solve_per_slot};
use crate::bandit::BanditState;
use crate::classifier::{descend, fit_with, loss_gradient, step_size, Dataset, FitOptions};
use crate::domain::{
    feature_update, Algorithm, ClassifierWeights, CoefficientMatrix, ExperimentConfig, FeatureVector, Label,
    ResourceVector, SlotOutcome, UserRecord, UsersPerSlot, VirtualQueueState,
};
use crate::environment::{realize_label, Environment};
use crate::error::{check_dim, Error, Result};
use crate::lyapunov::{drift_bound_holds, update_queue, ConstraintLedger};
use crate::SimRng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Weights are recorded at slot 0 and then every this many slots.
pub const WEIGHT_SAMPLE_EVERY: usize = 50;

/// Stream numbers used with [`SimRng::set_stream`]. Each kind of draw has its
/// own stream so that two algorithms run on the same seed meet the same users.
pub mod streams {
    pub const INITIAL: u64 = 0;
    pub const ARRIVALS: u64 = 1;
    pub const COEFFICIENTS: u64 = 2;
    pub const LABELS: u64 = 3;
    pub const USERS: u64 = 4;
}

pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RunTrace {
    pub outcomes: Vec<SlotOutcome>,
    pub weight_history: Vec<(usize, ClassifierWeights)>,
    pub config_echo: ExperimentConfig,
    pub final_weights: ClassifierWeights,
    pub final_queues: VirtualQueueState,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RunSummary {
    /// Complaints over users served, across the whole run.
    pub time_avg_positive_rate: f64,
    /// Mean over slots of `Σ_k Q_k`.
    pub time_avg_queue_length: f64,
    pub avg_resource_used: Vec<f64>,
    pub final_weight_norm: f64,
    /// `r̄_k` minus the time-average spend.
    pub constraint_slack: Vec<f64>,
}

/// Mean features of the users in one slot. They must share one matrix.
pub fn aggregate_super_user(users: &[(FeatureVector, CoefficientMatrix)]) -> Result<(FeatureVector, CoefficientMatrix)> {
    let (first_x, first_z) = users
        .first()
        .ok_or_else(|| Error::invalid("a super user needs at least one member"))?;
    let mut sum = first_x.as_slice().to_vec();
    for (x, z) in &users[1..] {
        check_dim("super user member features", sum.len(), x.len())?;
        if z != first_z {
            return Err(Error::invalid("super user members must share a coefficient matrix"));
        }
        sum.iter_mut().zip(x.as_slice()).for_each(|(s, v)| *s += v);
    }
    let n = users.len() as f64;
    let mean = FeatureVector::new(sum.into_iter().map(|s| s / n).collect())?;
    Ok((mean, first_z.clone()))
}

/// Runs whichever algorithm the config names.
pub fn run<E: Environment>(config: &ExperimentConfig, env: &mut E) -> Result<RunTrace> {
    run_loop(config, env)
}

pub fn run_ooqra<E: Environment>(config: &ExperimentConfig, env: &mut E) -> Result<RunTrace> {
    expect_algorithm(config, Algorithm::Ooqra)?;
    run_loop(config, env)
}

pub fn run_roqra<E: Environment>(config: &ExperimentConfig, env: &mut E) -> Result<RunTrace> {
    expect_algorithm(config, Algorithm::Roqra)?;
    run_loop(config, env)
}

pub fn run_baseline<E: Environment>(config: &ExperimentConfig, env: &mut E) -> Result<RunTrace> {
    expect_algorithm(config, Algorithm::Baseline)?;
    run_loop(config, env)
}

fn expect_algorithm(config: &ExperimentConfig, algo: Algorithm) -> Result<()> {
    if config.algorithm == algo {
        Ok(())
    } else {
        Err(Error::invalid(format!("config asks for {:?}, not {:?}", config.algorithm, algo)))
    }
}

fn users_this_slot(mode: UsersPerSlot, rng: &mut SimRng) -> Result<u32> {
    match mode {
        UsersPerSlot::Fixed(n) => Ok(n),
        UsersPerSlot::Poisson(0.0) => Ok(1),
        UsersPerSlot::Poisson(mean) => {
            let poisson = Poisson::new(mean).map_err(|e| Error::invalid(format!("poisson mean: {e}")))?;
            let extra: f64 = poisson.sample(rng);
            Ok(1 + extra as u32)
        }
    }
}

fn validate_against<E: Environment>(config: &ExperimentConfig, env: &E) -> Result<()> {
    config.validate_numbers()?;
    check_dim("budget vs environment resources", env.resource_dim(), config.budget.len())?;
    if env.is_heterogeneous() && config.users_per_slot != UsersPerSlot::Fixed(1) {
        return Err(Error::Unsupported(
            "heterogeneous users are served one per slot".into(),
        ));
    }
    Ok(())
}

trait AtSlot<T> {
    fn at(self, slot: usize) -> Result<T>;
}

impl<T> AtSlot<T> for Result<T> {
    fn at(self, slot: usize) -> Result<T> {
        self.map_err(|e| e.at_slot(slot))
    }
}

struct Streams {
    arrivals: SimRng,
    coefficients: SimRng,
    labels: SimRng,
    users: SimRng,
}

fn run_loop<E: Environment>(config: &ExperimentConfig, env: &mut E) -> Result<RunTrace> {
    validate_against(config, env)?;
    let k = env.resource_dim();
    let d = env.feature_dim();
    let algo = config.algorithm;

    let mut initial_rng = stream_rng(config.seed, streams::INITIAL);
    let mut rng = Streams {
        arrivals: stream_rng(config.seed, streams::ARRIVALS),
        coefficients: stream_rng(config.seed, streams::COEFFICIENTS),
        labels: stream_rng(config.seed, streams::LABELS),
        users: stream_rng(config.seed, streams::USERS),
    };

    let initial = env.initial_dataset(config.initial_size, &mut initial_rng)?;
    for rec in &initial {
        check_dim("initial record features", d, rec.features.len())?;
    }
    let mut dataset = Dataset::new(initial);
    let mut weights = fit_with(&dataset, FitOptions::default())?;

    let mut bandit = match algo {
        Algorithm::Roqra => Some(BanditState::new(d, k, config.ucb_c, config.horizon.max(2))?),
        _ => None,
    };
    let mut queues = VirtualQueueState::empty(k);
    let mut prices = VirtualQueueState::empty(k);
    let mut ledger = ConstraintLedger::new(k);
    let penalty_weight = match algo {
        Algorithm::Baseline => 1.0,
        _ => config.theta,
    };

    let mut outcomes = Vec::with_capacity(config.horizon);
    let mut weight_history = alloc::vec![(0, weights.clone())];

    for t in 1..=config.horizon {
        let members = users_this_slot(config.users_per_slot, &mut rng.users).at(t)?;
        let z_true = env.coefficients(&mut rng.coefficients);
        let mut group = Vec::with_capacity(members as usize);
        for _ in 0..members {
            group.push((env.arrival(&mut rng.arrivals).at(t)?, z_true.clone()));
        }
        let (x, _) = aggregate_super_user(&group).at(t)?;

        let plan_z = match (&bandit, algo) {
            (Some(b), _) => b.ucb_index(),
            _ if config.nominal_coefficients && env.is_heterogeneous() => env.nominal_coefficients(),
            _ => z_true.clone(),
        };
        let caps = env.slot_caps(&x, &z_true, &config.budget.per_slot_cap).at(t)?;
        let price_state = if algo == Algorithm::Baseline { &prices } else { &queues };
        let problem = build_slot_problem(&weights, &x, &plan_z, price_state, &caps, penalty_weight).at(t)?;
        let r = solve_per_slot(&problem);
        if !r.within(&caps) {
            return Err(Error::Invariant(format!("allocation {:?} outside caps {:?}", r.as_slice(), caps)).at_slot(t));
        }
        let predicted_prob = problem.predicted_positive(&r);
        let objective = per_slot_objective(&problem, &r).at(t)?;

        let mut positives = 0u32;
        for (member, _) in &group {
            let experienced = feature_update(member, &z_true, &r).at(t)?;
            let p = env.positive_probability(&experienced).at(t)?;
            let label = realize_label(p, config.label_sampling, &mut rng.labels).at(t)?;
            if label == Label::Positive {
                positives += 1;
            }
            let recorded = if algo == Algorithm::Roqra {
                feature_update(member, &plan_z, &r).at(t)?
            } else {
                experienced
            };
            dataset.push(UserRecord {
                features: recorded,
                label,
            });
        }

        let mut grad_norm_sq = 0.0;
        if config.classifier_updates {
            let grad = loss_gradient(&weights, &dataset).at(t)?;
            grad_norm_sq = grad.norm_sq();
            weights = descend(&weights, &grad, step_size(t, config.step_size_base));
            if !weights.is_finite() {
                return Err(Error::Invariant("classifier weights diverged".into()).at_slot(t));
            }
        }
        if let Some(b) = bandit.as_mut() {
            b.observe(&z_true, &r).at(t)?;
        }

        let next = update_queue(&queues, &r, &config.budget).at(t)?;
        if !drift_bound_holds(&queues, &r, &next, &caps, &config.budget.long_term_avg, config.theta, predicted_prob) {
            return Err(Error::Invariant("drift-plus-penalty bound failed".into()).at_slot(t));
        }
        queues = next;
        ledger.record(&r, &config.budget);
        if algo == Algorithm::Baseline {
            let eps = config.baseline_eps_schedule.step(t);
            let lambdas = prices
                .lengths()
                .iter()
                .zip(r.as_slice())
                .zip(&config.budget.long_term_avg)
                .map(|((l, r), avg)| (l + eps * (r - avg)).max(0.0))
                .collect();
            prices = VirtualQueueState::new(lambdas).at(t)?;
        }

        outcomes.push(SlotOutcome {
            slot: t,
            allocation: r,
            predicted_prob,
            users: members,
            positives,
            queue_snapshot: queues.clone(),
            per_slot_objective: objective,
            grad_norm_sq,
        });
        if t % WEIGHT_SAMPLE_EVERY == 0 {
            weight_history.push((t, weights.clone()));
        }
    }

    let broken = ledger.violations(&queues);
    if !broken.is_empty() {
        return Err(Error::Invariant(format!(
            "telescoping queue bound failed for resources {broken:?}"
        ))
        .at_slot(config.horizon));
    }

    Ok(RunTrace {
        outcomes,
        weight_history,
        config_echo: config.clone(),
        final_weights: weights,
        final_queues: queues,
    })
}

pub fn summarize(trace: &RunTrace) -> RunSummary {
    let k = trace.config_echo.budget.len();
    let slots = trace.outcomes.len();
    let (users, positives) = trace
        .outcomes
        .iter()
        .fold((0u64, 0u64), |(u, p), o| (u + o.users as u64, p + o.positives as u64));
    let mut spend = alloc::vec![0.0; k];
    let mut queue_sum = 0.0;
    for o in &trace.outcomes {
        for (s, r) in spend.iter_mut().zip(o.allocation.as_slice()) {
            *s += r;
        }
        queue_sum += o.queue_snapshot.total();
    }
    let per_slot = |v: f64| if slots == 0 { 0.0 } else { v / slots as f64 };
    let avg_resource_used: Vec<f64> = spend.into_iter().map(per_slot).collect();
    let constraint_slack = trace
        .config_echo
        .budget
        .long_term_avg
        .iter()
        .zip(&avg_resource_used)
        .map(|(avg, used)| avg - used)
        .collect();
    RunSummary {
        time_avg_positive_rate: if users == 0 { 0.0 } else { positives as f64 / users as f64 },
        time_avg_queue_length: per_slot(queue_sum),
        avg_resource_used,
        final_weight_norm: trace.final_weights.norm(),
        constraint_slack,
    }
}

/// Fraction of users who complained in slots `1..=t`, for every `t`.
pub fn cumulative_positive_rate(outcomes: &[SlotOutcome]) -> Vec<f64> {
    let (mut users, mut positives) = (0u64, 0u64);
    outcomes
        .iter()
        .map(|o| {
            users += o.users as u64;
            positives += o.positives as u64;
            positives as f64 / users.max(1) as f64
        })
        .collect()
}

/// Running mean of `Σ_k Q_k` over slots `1..=t`, for every `t`.
pub fn cumulative_queue_mean(outcomes: &[SlotOutcome]) -> Vec<f64> {
    let mut sum = 0.0;
    outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| {
            sum += o.queue_snapshot.total();
            sum / (i + 1) as f64
        })
        .collect()
}

/// Sum of the allocation a slot handed out, for convenience in reports.
pub fn total_allocation(r: &ResourceVector) -> f64 {
    r.as_slice().iter().sum()
}
