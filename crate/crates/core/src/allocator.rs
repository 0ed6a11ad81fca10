//! Per-slot allocation: minimize `Σ Q_k r_k + θ·h(C + a·r)` over the box
//! `0 ≤ r_k ≤ B_k`, where `h(y) = 1 / (1 + e^y)`.
//!
//! The objective only sees the allocation through `y = C + a·r`, so for any
//! target `y` the cheapest way to reach it is a fractional knapsack: fill
//! resources in decreasing order of `a_k / Q_k`. Optimal allocations
//! therefore saturate a prefix of that order, put a partial amount on one
//! resource and nothing on the rest. Along the partial resource the
//! objective has at most two stationary points, the roots of
//! `Q s² + (2Q - θa) s + Q = 0` with `s = e^y`. The larger root is the local
//! minimum. [`solve_per_slot`] enumerates every prefix, both roots and the
//! box endpoints, and keeps the cheapest candidate, which makes it exact.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::classifier::{sigmoid, sigmoid_slope};
use crate::domain::{ClassifierWeights, CoefficientMatrix, FeatureVector, ResourceVector, VirtualQueueState};
use crate::error::{check_dim, Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Smallest log argument accepted when solving for the interior point.
const LOG_ARG_FLOOR: f64 = 1e-12;
/// Largest dimension the grid oracle will enumerate.
pub const GRID_MAX_RESOURCES: usize = 3;

/// One instance of the per-slot problem.
///
/// Resources with `a_k ≤ 0` can only hurt, so they are excluded and always
/// receive zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SlotProblem {
    /// `C = -w·x - w0`.
    pub offset: f64,
    /// `a = -Zᵀw`.
    pub efficiency: Vec<f64>,
    pub queues: Vec<f64>,
    pub caps: Vec<f64>,
    pub theta: f64,
}

impl SlotProblem {
    pub fn new(offset: f64, efficiency: Vec<f64>, queues: Vec<f64>, caps: Vec<f64>, theta: f64) -> Result<Self> {
        check_dim("slot problem queues", efficiency.len(), queues.len())?;
        check_dim("slot problem caps", efficiency.len(), caps.len())?;
        if efficiency.is_empty() {
            return Err(Error::invalid("slot problem needs at least one resource"));
        }
        if !offset.is_finite() || efficiency.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("slot problem coefficients must be finite"));
        }
        if queues.iter().any(|q| !q.is_finite() || *q < 0.0) {
            return Err(Error::invalid("queue prices must be finite and nonnegative"));
        }
        if caps.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::invalid("per-slot caps must be finite and nonnegative"));
        }
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::invalid("theta must be finite and nonnegative"));
        }
        Ok(Self {
            offset,
            efficiency,
            queues,
            caps,
            theta,
        })
    }

    pub fn len(&self) -> usize {
        self.efficiency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.efficiency.is_empty()
    }

    pub fn is_excluded(&self, k: usize) -> bool {
        self.efficiency[k] <= 0.0
    }

    /// Indices of resources with `a_k ≤ 0`.
    pub fn excluded(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_excluded(k)).collect()
    }

    /// `C + a·r`.
    pub fn exponent(&self, r: &[f64]) -> f64 {
        self.offset + self.efficiency.iter().zip(r).map(|(a, r)| a * r).sum::<f64>()
    }

    /// Predicted complaint probability `h(C + a·r)` after allocating `r`.
    pub fn predicted_positive(&self, r: &ResourceVector) -> f64 {
        sigmoid(self.exponent(r.as_slice()))
    }

    fn objective_raw(&self, r: &[f64]) -> f64 {
        let linear: f64 = self.queues.iter().zip(r).map(|(q, r)| q * r).sum();
        linear + self.theta * sigmoid(self.exponent(r))
    }
}

/// Builds the slot problem for a classifier, a user and a coefficient matrix.
pub fn build_slot_problem(
    weights: &ClassifierWeights,
    x: &FeatureVector,
    z: &CoefficientMatrix,
    queues: &VirtualQueueState,
    caps: &[f64],
    theta: f64,
) -> Result<SlotProblem> {
    check_dim("build_slot_problem features", weights.dim(), x.len())?;
    check_dim("build_slot_problem coefficient rows", x.len(), z.rows())?;
    check_dim("build_slot_problem queues", z.cols(), queues.len())?;
    let offset = -weights.logit(x.as_slice());
    let efficiency = (0..z.cols())
        .map(|k| -(0..z.rows()).map(|d| z.get(d, k) * weights.weights[d]).sum::<f64>())
        .collect();
    SlotProblem::new(offset, efficiency, queues.lengths().to_vec(), caps.to_vec(), theta)
}

/// `Σ Q_k r_k + θ·h(C + a·r)`; rejects allocations outside the box.
pub fn per_slot_objective(p: &SlotProblem, r: &ResourceVector) -> Result<f64> {
    check_dim("per_slot_objective", p.len(), r.len())?;
    if !r.within(&p.caps) {
        return Err(Error::invalid("allocation outside 0 <= r <= B"));
    }
    Ok(p.objective_raw(r.as_slice()))
}

/// Active resources in non-increasing order of `a_k / Q_k`.
///
/// `Q_k = 0` counts as infinite priority; those resources come first, by
/// descending `a_k`. Remaining ties keep index order. Excluded resources are
/// omitted.
pub fn priority_order(p: &SlotProblem) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).filter(|&k| !p.is_excluded(k)).collect();
    order.sort_by(|&i, &j| {
        let (ai, qi, aj, qj) = (p.efficiency[i], p.queues[i], p.efficiency[j], p.queues[j]);
        match (qi == 0.0, qj == 0.0) {
            (true, true) => aj.total_cmp(&ai),
            (true, false) => core::cmp::Ordering::Less,
            (false, true) => core::cmp::Ordering::Greater,
            // a_i/q_i vs a_j/q_j without dividing
            (false, false) => (aj * qi).total_cmp(&(ai * qj)),
        }
    });
    order
}

/// Roots `s = e^y` of `Q s² + (2Q - θa) s + Q = 0`, larger first, or `None`
/// when `Q > θa/4` (no stationary point).
fn stationary_roots(theta: f64, a: f64, q: f64) -> Option<(f64, f64)> {
    let ta = theta * a;
    if q > ta / 4.0 {
        return None;
    }
    let disc = (ta * ta - 4.0 * ta * q).max(0.0);
    let upper = -1.0 + (ta + libm::sqrt(disc)) / (2.0 * q);
    if upper <= LOG_ARG_FLOOR {
        return None;
    }
    // The roots multiply to one; 1/upper avoids cancellation in the "-" branch.
    Some((upper, 1.0 / upper))
}

fn amount_for_root(s: f64, partial: f64, a: f64, cap: f64) -> f64 {
    if s <= LOG_ARG_FLOOR {
        return 0.0;
    }
    ((libm::log(s) - partial) / a).clamp(0.0, cap)
}

/// Amount of resource `k` once every higher-priority resource is saturated
/// and contributes `partial = C + Σ a_k' B_k'` to the exponent.
///
/// `Q_k = 0` gives `B_k`; `Q_k > θa_k/4` gives 0; otherwise the local minimum
/// `(ln s - partial) / a_k` clamped to `[0, B_k]`, with
/// `s = -1 + (θa_k + sqrt(θ²a_k² - 4θa_kQ_k)) / (2Q_k)`.
pub fn closed_form_rk(p: &SlotProblem, k: usize, partial: f64) -> f64 {
    let (a, q, cap) = (p.efficiency[k], p.queues[k], p.caps[k]);
    if a <= 0.0 {
        return 0.0;
    }
    if q == 0.0 {
        return cap;
    }
    match stationary_roots(p.theta, a, q) {
        Some((upper, _)) => amount_for_root(upper, partial, a, cap),
        None => 0.0,
    }
}

/// Full output of the per-slot solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub allocation: ResourceVector,
    pub objective: f64,
    /// Priority order used to build the candidates.
    pub order: Vec<usize>,
    /// For each position in `order`, whether the marginal test
    /// `θ·h'(partial) < -Q_k / a_k` held with all earlier resources saturated.
    pub marginal_gain: Vec<bool>,
}

/// Exact minimizer of the per-slot problem. See the module docs.
pub fn solve_per_slot(p: &SlotProblem) -> ResourceVector {
    solve_detailed(p).allocation
}

pub fn solve_detailed(p: &SlotProblem) -> Solution {
    let order = priority_order(p);
    let mut marginal_gain = Vec::with_capacity(order.len());

    // Best candidate so far: `saturated` leading resources at cap, then
    // `amount` on the next one.
    let mut best_obj = p.theta * sigmoid(p.offset);
    let mut best_support = 0usize;
    let mut best: (usize, f64) = (0, 0.0);

    let mut partial = p.offset;
    let mut linear = 0.0;
    for (i, &k) in order.iter().enumerate() {
        let (a, q, cap) = (p.efficiency[k], p.queues[k], p.caps[k]);
        marginal_gain.push(p.theta * sigmoid_slope(partial) < -q / a);

        let mut amounts = [cap, f64::NAN, f64::NAN];
        if q > 0.0 {
            if let Some((upper, lower)) = stationary_roots(p.theta, a, q) {
                amounts[1] = amount_for_root(upper, partial, a, cap);
                amounts[2] = amount_for_root(lower, partial, a, cap);
            }
        }
        for &v in amounts.iter().filter(|v| **v > 0.0) {
            let obj = linear + q * v + p.theta * sigmoid(partial + a * v);
            let tol = 1e-12 * (1.0 + best_obj.abs());
            let support = i + 1;
            if obj < best_obj - tol || (obj <= best_obj + tol && support < best_support) {
                best_obj = obj;
                best_support = support;
                best = (i, v);
            }
        }
        linear += q * cap;
        partial += a * cap;
    }

    let mut r = alloc::vec![0.0; p.len()];
    if best_support > 0 {
        let (i, v) = best;
        for &k in &order[..i] {
            r[k] = p.caps[k];
        }
        r[order[i]] = v;
    }
    let objective = p.objective_raw(&r);
    Solution {
        allocation: ResourceVector::new(r).expect("allocation is built inside the box"),
        objective,
        order,
        marginal_gain,
    }
}

/// Exhaustive search on the grid `{0, step, 2·step, …, B_k}` (the cap itself
/// is always included). Ties go to the lexicographically first point.
pub fn grid_oracle(p: &SlotProblem, step: f64) -> Result<ResourceVector> {
    if p.len() > GRID_MAX_RESOURCES {
        return Err(Error::Unsupported(
            "grid oracle enumerates at most 3 resources".to_string(),
        ));
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::invalid("grid step must be positive"));
    }
    let axis = |k: usize| -> Vec<f64> {
        if k >= p.len() {
            return alloc::vec![0.0];
        }
        let cap = p.caps[k];
        let n = libm::floor(cap / step) as usize;
        let mut pts: Vec<f64> = (0..=n).map(|j| (j as f64 * step).min(cap)).collect();
        if cap - pts[n] > 1e-12 {
            pts.push(cap);
        }
        pts
    };
    let coef = |k: usize| if k < p.len() { (p.efficiency[k], p.queues[k]) } else { (0.0, 0.0) };
    let (g0, g1, g2) = (axis(0), axis(1), axis(2));
    let ((a0, q0), (a1, q1), (a2, q2)) = (coef(0), coef(1), coef(2));

    // exp(C + a0 r0 + a1 r1 + a2 r2) = exp(C + a0 r0 + a1 r1) · exp(a2 r2):
    // tabulate the last factor so the innermost loop has no transcendental call.
    let inner_exp: Vec<f64> = g2.iter().map(|r| libm::exp(a2 * r)).collect();
    let inner_lin: Vec<f64> = g2.iter().map(|r| q2 * r).collect();

    let mut best = f64::INFINITY;
    let mut arg = [0.0; 3];
    for &r0 in &g0 {
        for &r1 in &g1 {
            let head = libm::exp(p.offset + a0 * r0 + a1 * r1);
            let lin = q0 * r0 + q1 * r1;
            for (j, &r2) in g2.iter().enumerate() {
                let value = lin + inner_lin[j] + p.theta / (1.0 + head * inner_exp[j]);
                if value < best {
                    best = value;
                    arg = [r0, r1, r2];
                }
            }
        }
    }
    ResourceVector::new(arg[..p.len()].to_vec())
}

/// Checks that nonzero amounts only appear after every earlier resource in
/// `order` is saturated. Excluded resources must be zero.
pub fn is_sequential(p: &SlotProblem, r: &ResourceVector) -> bool {
    let order = priority_order(p);
    let excluded_zero = (0..p.len()).filter(|&k| p.is_excluded(k)).all(|k| r[k] == 0.0);
    let mut seen_unsaturated = false;
    for &k in &order {
        if r[k] > 0.0 && seen_unsaturated {
            return false;
        }
        if r[k] < p.caps[k] {
            seen_unsaturated = true;
        }
    }
    excluded_zero
}

/// KKT multipliers implied by an allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    /// Largest `|θ a_k h'(y) + Q_k|` over coordinates strictly inside the box.
    pub max_interior_residual: f64,
    /// Smallest `τ_k = -θ a_k h'(y) - Q_k` over saturated coordinates.
    pub min_upper_multiplier: f64,
    /// Smallest `v_k = θ a_k h'(y) + Q_k` over zero coordinates.
    pub min_lower_multiplier: f64,
}

pub fn kkt_report(p: &SlotProblem, r: &ResourceVector) -> KktReport {
    let slope = sigmoid_slope(p.exponent(r.as_slice()));
    let mut report = KktReport {
        max_interior_residual: 0.0,
        min_upper_multiplier: f64::INFINITY,
        min_lower_multiplier: f64::INFINITY,
    };
    for k in 0..p.len() {
        let grad = p.theta * p.efficiency[k] * slope + p.queues[k];
        let cap = p.caps[k];
        if cap == 0.0 {
            continue;
        }
        if r[k] > 0.0 && r[k] < cap {
            report.max_interior_residual = report.max_interior_residual.max(grad.abs());
        } else if r[k] >= cap {
            report.min_upper_multiplier = report.min_upper_multiplier.min(-grad);
        } else {
            report.min_lower_multiplier = report.min_lower_multiplier.min(grad);
        }
    }
    report
}
