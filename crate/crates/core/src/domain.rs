//! Value types shared by every module.
//!
//! Vectors are dense `f64` with their length fixed when a run starts. Feature
//! dimension is `D`, resource dimension is `K`.

use alloc::vec::Vec;
use core::ops::Index;

use crate::environment::{GroundTruth, LabelSampling, ScenarioKind};
use crate::error::{check_dim, Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Per-user feature state `x(t)` (length `D`, all entries finite).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("feature vector must have at least one entry"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature vector entries must be finite"));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Allocation `r(t)`, one nonnegative amount per resource type.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct ResourceVector(Vec<f64>);

impl ResourceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("resource amounts must be finite and nonnegative"));
        }
        Ok(Self(values))
    }

    pub fn zeros(k: usize) -> Self {
        Self(alloc::vec![0.0; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Number of resources with a strictly positive amount.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|&&v| v > 0.0).count()
    }

    /// True when `0 <= r_k <= caps_k` for every `k`.
    pub fn within(&self, caps: &[f64]) -> bool {
        self.0.len() == caps.len() && self.0.iter().zip(caps).all(|(r, c)| *r >= 0.0 && r <= c)
    }
}

impl Index<usize> for ResourceVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-slot caps `B_k` and long-term average limits `r̄_k`.
///
/// Zero entries are accepted so that a resource can be switched off entirely
/// (the no-allocation reference run uses `B = r̄ = 0`). An infinite cap means
/// the scenario's own per-user cap is the only ceiling.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ResourceBudget {
    pub per_slot_cap: Vec<f64>,
    pub long_term_avg: Vec<f64>,
}

impl ResourceBudget {
    pub fn new(per_slot_cap: Vec<f64>, long_term_avg: Vec<f64>) -> Result<Self> {
        check_dim("budget", per_slot_cap.len(), long_term_avg.len())?;
        if per_slot_cap.is_empty() {
            return Err(Error::invalid("budget needs at least one resource"));
        }
        for (b, r) in per_slot_cap.iter().zip(&long_term_avg) {
            if b.is_nan() || *b < 0.0 {
                return Err(Error::invalid("per-slot caps must be nonnegative"));
            }
            if !r.is_finite() || *r < 0.0 {
                return Err(Error::invalid("long-term averages must be finite and nonnegative"));
            }
            if r > b {
                return Err(Error::invalid("long-term average exceeds the per-slot cap"));
            }
        }
        Ok(Self {
            per_slot_cap,
            long_term_avg,
        })
    }

    pub fn len(&self) -> usize {
        self.per_slot_cap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_slot_cap.is_empty()
    }
}

/// Dense `D x K` matrix: entry `(d, k)` is the effect of one unit of
/// resource `k` on feature `d`. Row-major storage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CoefficientMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CoefficientMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("coefficient matrix must be at least 1x1"));
        }
        check_dim("coefficient matrix entries", rows * cols, entries.len())?;
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("coefficient entries must be finite"));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_dim("coefficient matrix row", cols, row.len())?;
            entries.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: alloc::vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, d: usize, k: usize) -> f64 {
        self.entries[d * self.cols + k]
    }

    pub fn set(&mut self, d: usize, k: usize, value: f64) {
        self.entries[d * self.cols + k] = value;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// Logistic model `(w0, w)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ClassifierWeights {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl ClassifierWeights {
    pub fn zeros(d: usize) -> Self {
        Self {
            intercept: 0.0,
            weights: alloc::vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w0 + w·x`, without a dimension check.
    pub(crate) fn logit(&self, x: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// `sqrt(w0² + Σ w_d²)`.
    pub fn norm(&self) -> f64 {
        let sq = self.intercept * self.intercept + self.weights.iter().map(|w| w * w).sum::<f64>();
        libm::sqrt(sq)
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

/// Virtual queue lengths `Q_k`, always nonnegative.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(transparent))]
pub struct VirtualQueueState(Vec<f64>);

impl VirtualQueueState {
    pub fn empty(k: usize) -> Self {
        Self(alloc::vec![0.0; k])
    }

    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.iter().any(|q| !q.is_finite() || *q < 0.0) {
            return Err(Error::invalid("queue lengths must be finite and nonnegative"));
        }
        Ok(Self(lengths))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Binary QoE label. `Positive` means the user complained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Label {
    Negative = 0,
    Positive = 1,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        self as u8 as f64
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            _ => Err(Error::invalid("label must be 0 or 1")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct UserRecord {
    pub features: FeatureVector,
    pub label: Label,
}

/// Everything recorded about one slot of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SlotOutcome {
    pub slot: usize,
    pub allocation: ResourceVector,
    /// Predicted complaint probability of the (super) user after allocation.
    pub predicted_prob: f64,
    /// Users served in this slot, and how many of them complained.
    pub users: u32,
    pub positives: u32,
    /// Queue lengths at the end of the slot, `Q(t+1)`.
    pub queue_snapshot: VirtualQueueState,
    /// Value of the per-slot drift-plus-penalty objective at the chosen allocation.
    pub per_slot_objective: f64,
    /// Squared norm of the loss gradient used for this slot's classifier step
    /// (zero when classifier updates are disabled).
    pub grad_norm_sq: f64,
}

impl SlotOutcome {
    /// The realized label when exactly one user was served.
    pub fn realized_label(&self) -> Option<Label> {
        match (self.users, self.positives) {
            (1, 0) => Some(Label::Negative),
            (1, 1) => Some(Label::Positive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum Algorithm {
    Ooqra,
    Roqra,
    Baseline,
}

/// Dual step-size schedule of the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum EpsSchedule {
    /// `0.4 / t`
    InvT,
    /// `0.4 / ln(t + 1)`
    InvLog,
    /// Fixed step; `Constant(1.0)` is the schedule the CLI calls `one`.
    Constant(f64),
}

impl EpsSchedule {
    pub fn step(self, t: usize) -> f64 {
        let t = t.max(1) as f64;
        match self {
            EpsSchedule::InvT => 0.4 / t,
            EpsSchedule::InvLog => 0.4 / libm::log(t + 1.0),
            EpsSchedule::Constant(eps) => eps,
        }
    }
}

/// How many homogeneous users arrive per slot.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum UsersPerSlot {
    Fixed(u32),
    /// `1 + Poisson(mean)`
    Poisson(f64),
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub truth: GroundTruth,
    pub algorithm: Algorithm,
    pub theta: f64,
    pub budget: ResourceBudget,
    pub horizon: usize,
    pub initial_size: usize,
    pub step_size_base: f64,
    pub ucb_c: f64,
    pub baseline_eps_schedule: EpsSchedule,
    pub seed: u64,
    pub trials: usize,
    pub users_per_slot: UsersPerSlot,
    /// When false the classifier keeps its initial fit for the whole run.
    pub classifier_updates: bool,
    /// In heterogeneous scenarios, let OOQRA and the baseline plan with the
    /// mean coefficient matrix instead of the user's own `Z(t)`.
    pub nominal_coefficients: bool,
    pub label_sampling: LabelSampling,
}

impl ExperimentConfig {
    /// Reference-scale defaults for a scenario: OOQRA, `θ = 40`, `η₀ = 1`, `c = 1`.
    pub fn for_scenario(scenario: ScenarioKind) -> Self {
        let (horizon, initial_size, budget) = scenario.default_sizes();
        Self {
            scenario,
            truth: scenario.default_truth(),
            algorithm: Algorithm::Ooqra,
            theta: 40.0,
            budget,
            horizon,
            initial_size,
            step_size_base: 1.0,
            ucb_c: 1.0,
            baseline_eps_schedule: EpsSchedule::InvT,
            seed: 0,
            trials: 10,
            users_per_slot: UsersPerSlot::Fixed(1),
            classifier_updates: true,
            nominal_coefficients: false,
            label_sampling: LabelSampling::Bernoulli,
        }
    }

    /// Full check, including that the budget fits the named scenario.
    pub fn validate(&self) -> Result<()> {
        self.validate_numbers()?;
        check_dim("budget vs scenario resources", self.scenario.resource_dim(), self.budget.len())
    }

    /// Checks every field except the scenario's dimensions, for runs against
    /// a custom environment.
    pub fn validate_numbers(&self) -> Result<()> {
        if !self.theta.is_finite() || self.theta < 0.0 {
            return Err(Error::invalid("theta must be finite and nonnegative"));
        }
        if !self.step_size_base.is_finite() || self.step_size_base < 0.0 {
            return Err(Error::invalid("step size base must be finite and nonnegative"));
        }
        if !self.ucb_c.is_finite() || self.ucb_c < 0.0 {
            return Err(Error::invalid("ucb exploration coefficient must be finite and nonnegative"));
        }
        if let EpsSchedule::Constant(e) = self.baseline_eps_schedule {
            if !e.is_finite() || e < 0.0 {
                return Err(Error::invalid("baseline step must be finite and nonnegative"));
            }
        }
        match self.users_per_slot {
            UsersPerSlot::Fixed(0) => return Err(Error::invalid("at least one user per slot")),
            UsersPerSlot::Poisson(m) if !m.is_finite() || m < 0.0 => {
                return Err(Error::invalid("poisson mean must be finite and nonnegative"))
            }
            _ => {}
        }
        if self.algorithm == Algorithm::Roqra && self.users_per_slot != UsersPerSlot::Fixed(1) {
            return Err(Error::Unsupported(
                "ROQRA serves exactly one user per slot".into(),
            ));
        }
        if self.initial_size == 0 {
            return Err(Error::invalid("initial dataset must be nonempty"));
        }
        Ok(())
    }
}

/// `g = x + Z r`.
pub fn feature_update(
    x: &FeatureVector,
    z: &CoefficientMatrix,
    r: &ResourceVector,
) -> Result<FeatureVector> {
    check_dim("feature_update rows", x.len(), z.rows())?;
    check_dim("feature_update cols", z.cols(), r.len())?;
    let g = (0..z.rows())
        .map(|d| {
            let effect: f64 = (0..z.cols()).map(|k| z.get(d, k) * r[k]).sum();
            x[d] + effect
        })
        .collect();
    Ok(FeatureVector(g))
}
