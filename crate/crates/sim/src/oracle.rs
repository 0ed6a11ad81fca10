//! Randomized comparison of the per-slot solver against exhaustive grid search.

use cora_core::allocator::{grid_oracle, is_sequential, kkt_report, per_slot_objective, solve_per_slot, SlotProblem};
use cora_core::SimRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::SimResult;
use crate::trials::worker_count;

pub const DEFAULT_INSTANCES: usize = 200;
pub const DEFAULT_GRID_STEP: f64 = 0.01;
pub const GAP_TOLERANCE: f64 = 1e-3;
pub const KKT_TOLERANCE: f64 = 1e-6;

/// `K ∈ {1,2,3}`, `θ ∈ [1,100]`, `a_k ∈ (0,2]`, `Q_k ∈ [0, θa_k/2]`,
/// `B_k ∈ [0,10]`, `C ∈ [-5,5]`.
pub fn random_problem(rng: &mut SimRng) -> SlotProblem {
    let k = rng.random_range(1..=3);
    let theta = rng.random_range(1.0..=100.0);
    let efficiency: Vec<f64> = (0..k).map(|_| 2.0 - rng.random_range(0.0..2.0)).collect();
    let queues = efficiency.iter().map(|a| rng.random_range(0.0..=theta * a / 2.0)).collect();
    let caps = (0..k).map(|_| rng.random_range(0.0..=10.0)).collect();
    let offset = rng.random_range(-5.0..=5.0);
    SlotProblem::new(offset, efficiency, queues, caps, theta).expect("generated inside the valid ranges")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceCheck {
    pub index: usize,
    pub problem: SlotProblem,
    pub solver_allocation: Vec<f64>,
    pub grid_allocation: Vec<f64>,
    pub solver_objective: f64,
    pub grid_objective: f64,
    /// Solver objective minus grid objective; positive means the grid won.
    pub gap: f64,
    pub sequential: bool,
    pub kkt_residual: f64,
}

impl InstanceCheck {
    pub fn passes(&self) -> bool {
        self.gap <= GAP_TOLERANCE && self.sequential && self.kkt_residual < KKT_TOLERANCE
    }
}

pub fn check_instance(index: usize, problem: SlotProblem, step: f64) -> SimResult<InstanceCheck> {
    let solver = solve_per_slot(&problem);
    let grid = grid_oracle(&problem, step)?;
    let solver_objective = per_slot_objective(&problem, &solver)?;
    let grid_objective = per_slot_objective(&problem, &grid)?;
    Ok(InstanceCheck {
        index,
        sequential: is_sequential(&problem, &solver),
        kkt_residual: kkt_report(&problem, &solver).max_interior_residual,
        solver_allocation: solver.as_slice().to_vec(),
        grid_allocation: grid.as_slice().to_vec(),
        solver_objective,
        grid_objective,
        gap: solver_objective - grid_objective,
        problem,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub instances: usize,
    pub grid_step: f64,
    pub seed: u64,
    pub max_gap: f64,
    pub max_kkt_residual: f64,
    pub non_sequential: usize,
    pub failures: Vec<InstanceCheck>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Draws `instances` problems from `seed` and checks each one.
pub fn run_suite(instances: usize, step: f64, seed: u64) -> SimResult<OracleReport> {
    let mut rng = SimRng::seed_from_u64(seed);
    let problems: Vec<SlotProblem> = (0..instances).map(|_| random_problem(&mut rng)).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build()?;
    let checks: Vec<InstanceCheck> = pool.install(|| {
        problems
            .into_par_iter()
            .enumerate()
            .map(|(i, p)| check_instance(i, p, step))
            .collect::<SimResult<_>>()
    })?;
    Ok(OracleReport {
        instances,
        grid_step: step,
        seed,
        max_gap: checks.iter().map(|c| c.gap).fold(f64::NEG_INFINITY, f64::max),
        max_kkt_residual: checks.iter().map(|c| c.kkt_residual).fold(0.0, f64::max),
        non_sequential: checks.iter().filter(|c| !c.sequential).count(),
        failures: checks.into_iter().filter(|c| !c.passes()).collect(),
    })
}
