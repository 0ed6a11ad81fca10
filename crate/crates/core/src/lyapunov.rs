//! Virtual queues for the long-term average resource constraint.
//!
//! `Q_k(t+1) = max(Q_k(t) + r_k(t) - r̄_k, 0)`. A queue that stays bounded
//! means the average spend of resource `k` stays under `r̄_k`.

use alloc::vec::Vec;

use crate::domain::{ResourceBudget, ResourceVector, VirtualQueueState};
use crate::error::{check_dim, Result};

pub fn update_queue(
    queues: &VirtualQueueState,
    r: &ResourceVector,
    budget: &ResourceBudget,
) -> Result<VirtualQueueState> {
    check_dim("update_queue allocation", queues.len(), r.len())?;
    check_dim("update_queue budget", queues.len(), budget.len())?;
    let next = queues
        .lengths()
        .iter()
        .zip(r.as_slice())
        .zip(&budget.long_term_avg)
        .map(|((q, r), avg)| (q + r - avg).max(0.0))
        .collect();
    VirtualQueueState::new(next)
}

/// `V = ½ Σ Q_k²`.
pub fn lyapunov_value(queues: &VirtualQueueState) -> f64 {
    0.5 * queues.lengths().iter().map(|q| q * q).sum::<f64>()
}

/// Sample-path drift plus penalty, `V(Q_next) - V(Q) + θ·u`.
pub fn drift_plus_penalty(
    queues: &VirtualQueueState,
    next: &VirtualQueueState,
    theta: f64,
    penalty: f64,
) -> f64 {
    lyapunov_value(next) - lyapunov_value(queues) + theta * penalty
}

/// `½ Σ max(B_k, r̄_k)²`, which dominates `½ Σ (r_k - r̄_k)²` for any
/// feasible allocation.
pub fn drift_constant(caps: &[f64], long_term_avg: &[f64]) -> f64 {
    0.5 * caps
        .iter()
        .zip(long_term_avg)
        .map(|(b, avg)| {
            let m = b.max(*avg);
            m * m
        })
        .sum::<f64>()
}

/// Checks `drift_plus_penalty ≤ D + Σ Q_k r_k + θ·u` for one slot.
///
/// `caps` are the caps the allocation was drawn under; the comparison has a
/// relative slack of `1e-9` for rounding.
pub fn drift_bound_holds(
    queues: &VirtualQueueState,
    r: &ResourceVector,
    next: &VirtualQueueState,
    caps: &[f64],
    long_term_avg: &[f64],
    theta: f64,
    penalty: f64,
) -> bool {
    let lhs = drift_plus_penalty(queues, next, theta, penalty);
    let linear: f64 = queues.lengths().iter().zip(r.as_slice()).map(|(q, r)| q * r).sum();
    let rhs = drift_constant(caps, long_term_avg) + linear + theta * penalty;
    lhs <= rhs + 1e-9 * (1.0 + rhs.abs())
}

/// Running `Σ_t (r_k(t) - r̄_k)` per resource, for the telescoping check
/// `Q_k(T) ≥ Σ_{t<T} (r_k(t) - r̄_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintLedger {
    excess: Vec<f64>,
    spent: Vec<f64>,
    slots: usize,
}

impl ConstraintLedger {
    pub fn new(k: usize) -> Self {
        Self {
            excess: alloc::vec![0.0; k],
            spent: alloc::vec![0.0; k],
            slots: 0,
        }
    }

    pub fn record(&mut self, r: &ResourceVector, budget: &ResourceBudget) {
        for k in 0..self.excess.len() {
            self.excess[k] += r[k] - budget.long_term_avg[k];
            self.spent[k] += r[k];
        }
        self.slots += 1;
    }

    pub fn cumulative_excess(&self) -> &[f64] {
        &self.excess
    }

    /// Time-average spend per resource.
    pub fn average_spend(&self) -> Vec<f64> {
        let n = self.slots.max(1) as f64;
        self.spent.iter().map(|s| s / n).collect()
    }

    /// Indices `k` where the telescoping inequality fails by more than
    /// `1e-9` (relative to the magnitude of the sums involved).
    pub fn violations(&self, queues: &VirtualQueueState) -> Vec<usize> {
        queues
            .lengths()
            .iter()
            .zip(&self.excess)
            .enumerate()
            .filter(|(_, (q, e))| **q < **e - 1e-9 * (1.0 + e.abs()))
            .map(|(k, _)| k)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn q(v: &[f64]) -> VirtualQueueState {
        VirtualQueueState::new(v.to_vec()).unwrap()
    }

    fn budget(avg: &[f64]) -> ResourceBudget {
        ResourceBudget::new(vec![f64::INFINITY; avg.len()], avg.to_vec()).unwrap()
    }

    #[test]
    fn update_queue_examples() {
        let r = |v: f64| ResourceVector::new(vec![v]).unwrap();
        assert_eq!(update_queue(&q(&[5.0]), &r(3.0), &budget(&[2.0])).unwrap(), q(&[6.0]));
        assert_eq!(update_queue(&q(&[0.0]), &r(0.0), &budget(&[2.0])).unwrap(), q(&[0.0]));
        assert_eq!(update_queue(&q(&[1.0]), &r(0.0), &budget(&[2.0])).unwrap(), q(&[0.0]));
        assert!(update_queue(&q(&[1.0, 2.0]), &r(0.0), &budget(&[2.0])).is_err());
    }

    #[test]
    fn lyapunov_value_examples() {
        assert_eq!(lyapunov_value(&q(&[0.0, 0.0])), 0.0);
        assert_eq!(lyapunov_value(&q(&[3.0, 4.0])), 12.5);
        assert_eq!(lyapunov_value(&q(&[7.0])), 24.5);
    }

    #[test]
    fn drift_plus_penalty_examples() {
        assert_eq!(drift_plus_penalty(&q(&[2.0]), &q(&[2.0]), 3.0, 0.0), 0.0);
        assert_eq!(drift_plus_penalty(&q(&[0.0]), &q(&[2.0]), 10.0, 0.5), 7.0);
    }

    proptest! {
        #[test]
        fn trajectories_respect_bounds(
            avg in prop::collection::vec(0.0..10.0f64, 1..4),
            seq in prop::collection::vec(prop::collection::vec(0.0..15.0f64, 3), 1..200),
            theta in 0.0..100.0f64,
            penalty in 0.0..1.0f64,
        ) {
            let k = avg.len();
            let caps = vec![15.0; k];
            let b = ResourceBudget::new(caps.clone(), avg.clone()).unwrap();
            let mut queues = VirtualQueueState::empty(k);
            let mut ledger = ConstraintLedger::new(k);
            for step in &seq {
                let r = ResourceVector::new(step[..k].to_vec()).unwrap();
                let next = update_queue(&queues, &r, &b).unwrap();
                prop_assert!(next.lengths().iter().all(|v| *v >= 0.0));
                prop_assert!(drift_bound_holds(&queues, &r, &next, &caps, &avg, theta, penalty));
                ledger.record(&r, &b);
                queues = next;
            }
            prop_assert!(ledger.violations(&queues).is_empty());
            let spend = ledger.average_spend();
            for kk in 0..k {
                prop_assert!(spend[kk] <= avg[kk] + queues.lengths()[kk] / seq.len() as f64 + 1e-9);
            }
        }
    }
}
