//! Synthetic worlds: who arrives, how resources move their features, and how
//! likely they are to complain afterwards.
//!
//! Two scenarios are built in. The Gaussian one draws users from two
//! isotropic clusters at `(10, 10)` (satisfied) and `(-10, -10)`
//! (complaining), and one resource raises `x2` by `z` per unit, up to
//! `x2 = 20`. The YouTube-style one has `x1` = round-trip time in seconds and
//! `x2` = bandwidth in Mbps; bandwidth is the resource.
//!
//! Randomness always comes from a caller-owned [`SimRng`].

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::classifier::sigmoid;
use crate::domain::{CoefficientMatrix, FeatureVector, Label, ResourceBudget, UserRecord};
use crate::error::{check_dim, Error, Result};
use crate::SimRng;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Cluster centre of satisfied users; complaining users sit at the negation.
pub const GAUSSIAN_NEGATIVE_MEAN: f64 = 10.0;
/// Per-coordinate variance of both clusters.
pub const GAUSSIAN_VARIANCE: f64 = 20.0;
/// Resources can raise `x2` at most up to this level.
pub const GAUSSIAN_TARGET: f64 = 20.0;
/// Smallest coefficient used when dividing by `z` in the heterogeneous cap.
pub const COEFF_FLOOR: f64 = 1e-6;
/// Raw RTT in milliseconds is divided by this before it reaches the model.
pub const RTT_SCALE_MS: f64 = 1000.0;
pub const RTT_RANGE_MS: (f64, f64) = (40.0, 1000.0);
pub const BANDWIDTH_RANGE_MBPS: (f64, f64) = (0.0, 10.0);
/// Below this bandwidth every viewer complains.
pub const BANDWIDTH_FLOOR_MBPS: f64 = 4.0;
/// Per-slot bandwidth cap of the YouTube-style scenario.
pub const YOUTUBE_SLOT_CAP_MBPS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "kebab-case"))]
pub enum ScenarioKind {
    Gaussian,
    /// Gaussian users whose bandwidth coefficient is `U[0, 1]` each slot.
    GaussianHetero,
    Youtube,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [ScenarioKind::Gaussian, ScenarioKind::GaussianHetero, ScenarioKind::Youtube];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Gaussian => "gaussian",
            ScenarioKind::GaussianHetero => "gaussian-hetero",
            ScenarioKind::Youtube => "youtube",
        }
    }

    pub fn feature_dim(self) -> usize {
        2
    }

    /// Every built-in scenario has a single resource acting on `x2`.
    pub fn resource_dim(self) -> usize {
        1
    }

    pub fn is_heterogeneous(self) -> bool {
        self == ScenarioKind::GaussianHetero
    }

    /// `(horizon, initial dataset size, budget)` at full scale.
    pub fn default_sizes(self) -> (usize, usize, ResourceBudget) {
        match self {
            ScenarioKind::Gaussian | ScenarioKind::GaussianHetero => (
                6000,
                600,
                ResourceBudget {
                    per_slot_cap: alloc::vec![f64::INFINITY],
                    long_term_avg: alloc::vec![10.0],
                },
            ),
            ScenarioKind::Youtube => (
                2000,
                269,
                ResourceBudget {
                    per_slot_cap: alloc::vec![YOUTUBE_SLOT_CAP_MBPS],
                    long_term_avg: alloc::vec![1.0],
                },
            ),
        }
    }

    pub fn default_truth(self) -> GroundTruth {
        match self {
            ScenarioKind::Gaussian | ScenarioKind::GaussianHetero => GroundTruth::GaussianPosterior,
            ScenarioKind::Youtube => GroundTruth::Youtube,
        }
    }
}

impl core::str::FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(alloc::format!("unknown scenario '{s}'")))
    }
}

/// Probability of a complaint as a function of the (post-allocation) features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum GroundTruth {
    GaussianPosterior,
    Threshold,
    Youtube,
}

impl GroundTruth {
    pub fn probability(self, x: &FeatureVector) -> Result<f64> {
        check_dim("ground truth features", 2, x.len())?;
        Ok(match self {
            GroundTruth::GaussianPosterior => gaussian_posterior_truth(x),
            GroundTruth::Threshold => threshold_truth(x),
            GroundTruth::Youtube => youtube_truth(x),
        })
    }
}

/// How a realized label is drawn from a complaint probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "snake_case"))]
pub enum LabelSampling {
    #[default]
    Bernoulli,
    /// Positive exactly when the probability is at least one half.
    Threshold,
}

/// Posterior of the complaining cluster under equal priors.
pub fn gaussian_posterior_truth(x: &FeatureVector) -> f64 {
    let m = GAUSSIAN_NEGATIVE_MEAN;
    let dist_sq = |centre: f64| x.as_slice().iter().map(|v| (v - centre) * (v - centre)).sum::<f64>();
    // log φ₋ - log φ₊ = (‖x-μ₊‖² - ‖x-μ₋‖²) / (2σ²)
    let log_ratio = (dist_sq(-m) - dist_sq(m)) / (2.0 * GAUSSIAN_VARIANCE);
    sigmoid(log_ratio)
}

pub fn threshold_truth(x: &FeatureVector) -> f64 {
    if x[0] <= 0.0 && x[1] <= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Fitted complaint probability as a function of normalized RTT.
pub fn rtt_complaint_curve(rtt: f64) -> f64 {
    -1.1 * rtt * rtt + 2.3 * rtt - 0.2
}

pub fn youtube_truth(x: &FeatureVector) -> f64 {
    let starved = if x[1] < BANDWIDTH_FLOOR_MBPS { 1.0 } else { 0.0 };
    rtt_complaint_curve(x[0]).max(starved).clamp(0.0, 1.0)
}

pub fn sample_label(p: f64, rng: &mut SimRng) -> Result<Label> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("label probability must lie in [0, 1]"));
    }
    Ok(if rng.random::<f64>() < p { Label::Positive } else { Label::Negative })
}

pub fn realize_label(p: f64, mode: LabelSampling, rng: &mut SimRng) -> Result<Label> {
    match mode {
        LabelSampling::Bernoulli => sample_label(p, rng),
        LabelSampling::Threshold if (0.0..=1.0).contains(&p) => {
            Ok(if p >= 0.5 { Label::Positive } else { Label::Negative })
        }
        LabelSampling::Threshold => Err(Error::invalid("label probability must lie in [0, 1]")),
    }
}

fn gaussian_user(rng: &mut SimRng) -> (FeatureVector, Label) {
    let positive = rng.random::<bool>();
    let centre = if positive { -GAUSSIAN_NEGATIVE_MEAN } else { GAUSSIAN_NEGATIVE_MEAN };
    let normal = Normal::new(centre, libm::sqrt(GAUSSIAN_VARIANCE)).expect("positive std");
    let x = alloc::vec![normal.sample(rng), normal.sample(rng)];
    let label = if positive { Label::Positive } else { Label::Negative };
    (FeatureVector::new(x).expect("normal draws are finite"), label)
}

fn youtube_features(rng: &mut SimRng) -> FeatureVector {
    let rtt_ms = rng.random_range(RTT_RANGE_MS.0..=RTT_RANGE_MS.1);
    let bandwidth = rng.random_range(BANDWIDTH_RANGE_MBPS.0..=BANDWIDTH_RANGE_MBPS.1);
    FeatureVector::new(alloc::vec![rtt_ms / RTT_SCALE_MS, bandwidth]).expect("finite")
}

/// `n` users, each from one of the two clusters with equal probability,
/// labelled by cluster.
pub fn gen_gaussian_dataset(n: usize, seed: u64) -> Result<Vec<UserRecord>> {
    gaussian_dataset_with(n, &mut SimRng::seed_from_u64(seed))
}

pub fn gaussian_dataset_with(n: usize, rng: &mut SimRng) -> Result<Vec<UserRecord>> {
    if n == 0 {
        return Err(Error::invalid("dataset size must be at least 1"));
    }
    Ok((0..n)
        .map(|_| {
            let (features, label) = gaussian_user(rng);
            UserRecord { features, label }
        })
        .collect())
}

/// `n` viewers with uniform RTT and bandwidth, labels drawn from
/// [`youtube_truth`].
pub fn gen_youtube_dataset(n: usize, seed: u64) -> Result<Vec<UserRecord>> {
    youtube_dataset_with(n, &mut SimRng::seed_from_u64(seed))
}

pub fn youtube_dataset_with(n: usize, rng: &mut SimRng) -> Result<Vec<UserRecord>> {
    if n == 0 {
        return Err(Error::invalid("dataset size must be at least 1"));
    }
    (0..n)
        .map(|_| {
            let features = youtube_features(rng);
            let label = sample_label(youtube_truth(&features), rng)?;
            Ok(UserRecord { features, label })
        })
        .collect()
}

/// `Z = [[0], [1]]`: one unit of the resource adds one unit to `x2`.
pub fn unit_bandwidth_matrix() -> CoefficientMatrix {
    CoefficientMatrix::from_rows(&[&[0.0], &[1.0]]).expect("static shape")
}

/// `Z = [[0], [z]]` with `z ~ U[0, 1]`; the first row stays zero.
pub fn sample_coeff_matrix(rng: &mut SimRng) -> CoefficientMatrix {
    let z: f64 = rng.random();
    CoefficientMatrix::from_rows(&[&[0.0], &[z]]).expect("static shape")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapMode {
    Homogeneous,
    Heterogeneous,
}

/// Per-slot caps for the Gaussian scenarios: the resource may lift `x2` to
/// at most `20`, and never beyond the configured cap.
pub fn effective_cap(x: &FeatureVector, z: &CoefficientMatrix, mode: CapMode, configured: &[f64]) -> Result<Vec<f64>> {
    check_dim("effective_cap features", 2, x.len())?;
    check_dim("effective_cap coefficient rows", 2, z.rows())?;
    check_dim("effective_cap resources", z.cols(), configured.len())?;
    let headroom = GAUSSIAN_TARGET - x[1];
    let mut caps = configured.to_vec();
    let scenario_cap = match mode {
        CapMode::Homogeneous => headroom.max(0.0),
        CapMode::Heterogeneous => (headroom / z.get(1, 0).max(COEFF_FLOOR)).max(0.0),
    };
    caps[0] = caps[0].min(scenario_cap);
    Ok(caps)
}

/// What the closed loop needs from a world.
///
/// Each method that draws randomness receives the generator for its own
/// stream, so that algorithms compared on the same seed see the same users.
pub trait Environment {
    fn feature_dim(&self) -> usize;
    fn resource_dim(&self) -> usize;
    fn is_heterogeneous(&self) -> bool;
    fn initial_dataset(&mut self, n: usize, rng: &mut SimRng) -> Result<Vec<UserRecord>>;
    fn arrival(&mut self, rng: &mut SimRng) -> Result<FeatureVector>;
    /// True coefficient matrix for this slot.
    fn coefficients(&mut self, rng: &mut SimRng) -> CoefficientMatrix;
    /// Mean coefficient matrix, for planners that do not see `Z(t)`.
    fn nominal_coefficients(&self) -> CoefficientMatrix;
    fn positive_probability(&self, x: &FeatureVector) -> Result<f64>;
    /// Per-slot caps for a user at `x` whose true matrix is `z`.
    fn slot_caps(&self, x: &FeatureVector, z: &CoefficientMatrix, configured: &[f64]) -> Result<Vec<f64>>;
}

/// A built-in scenario with a chosen ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub truth: GroundTruth,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, truth: GroundTruth) -> Self {
        Self { kind, truth }
    }
}

impl Environment for Scenario {
    fn feature_dim(&self) -> usize {
        self.kind.feature_dim()
    }

    fn resource_dim(&self) -> usize {
        self.kind.resource_dim()
    }

    fn is_heterogeneous(&self) -> bool {
        self.kind.is_heterogeneous()
    }

    fn initial_dataset(&mut self, n: usize, rng: &mut SimRng) -> Result<Vec<UserRecord>> {
        match self.kind {
            ScenarioKind::Youtube => youtube_dataset_with(n, rng),
            _ => {
                let mut data = gaussian_dataset_with(n, rng)?;
                if self.truth != GroundTruth::GaussianPosterior {
                    for rec in &mut data {
                        rec.label = sample_label(self.truth.probability(&rec.features)?, rng)?;
                    }
                }
                Ok(data)
            }
        }
    }

    fn arrival(&mut self, rng: &mut SimRng) -> Result<FeatureVector> {
        Ok(match self.kind {
            ScenarioKind::Youtube => youtube_features(rng),
            _ => gaussian_user(rng).0,
        })
    }

    fn coefficients(&mut self, rng: &mut SimRng) -> CoefficientMatrix {
        match self.kind {
            ScenarioKind::GaussianHetero => sample_coeff_matrix(rng),
            _ => unit_bandwidth_matrix(),
        }
    }

    fn nominal_coefficients(&self) -> CoefficientMatrix {
        match self.kind {
            ScenarioKind::GaussianHetero => CoefficientMatrix::from_rows(&[&[0.0], &[0.5]]).expect("static shape"),
            _ => unit_bandwidth_matrix(),
        }
    }

    fn positive_probability(&self, x: &FeatureVector) -> Result<f64> {
        self.truth.probability(x)
    }

    fn slot_caps(&self, x: &FeatureVector, z: &CoefficientMatrix, configured: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            ScenarioKind::Gaussian => effective_cap(x, z, CapMode::Homogeneous, configured),
            ScenarioKind::GaussianHetero => effective_cap(x, z, CapMode::Heterogeneous, configured),
            ScenarioKind::Youtube => {
                check_dim("youtube caps", 1, configured.len())?;
                Ok(configured.to_vec())
            }
        }
    }
}

/// Replays recorded users: the first `n` records seed the classifier and the
/// rest arrive in order (cycling when exhausted). Outcomes still come from
/// the wrapped scenario's ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    base: Scenario,
    records: Vec<UserRecord>,
    cursor: usize,
}

impl Replay {
    pub fn new(base: Scenario, records: Vec<UserRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for rec in &records {
            check_dim("replayed record", base.feature_dim(), rec.features.len())?;
        }
        Ok(Self {
            base,
            records,
            cursor: 0,
        })
    }
}

impl Environment for Replay {
    fn feature_dim(&self) -> usize {
        self.base.feature_dim()
    }

    fn resource_dim(&self) -> usize {
        self.base.resource_dim()
    }

    fn is_heterogeneous(&self) -> bool {
        self.base.is_heterogeneous()
    }

    fn initial_dataset(&mut self, n: usize, _rng: &mut SimRng) -> Result<Vec<UserRecord>> {
        if n == 0 || n >= self.records.len() {
            return Err(Error::invalid("replayed data must hold more records than the initial set"));
        }
        self.cursor = n;
        Ok(self.records[..n].to_vec())
    }

    fn arrival(&mut self, _rng: &mut SimRng) -> Result<FeatureVector> {
        if self.cursor >= self.records.len() {
            self.cursor = 0;
        }
        let x = self.records[self.cursor].features.clone();
        self.cursor += 1;
        Ok(x)
    }

    fn coefficients(&mut self, rng: &mut SimRng) -> CoefficientMatrix {
        self.base.coefficients(rng)
    }

    fn nominal_coefficients(&self) -> CoefficientMatrix {
        self.base.nominal_coefficients()
    }

    fn positive_probability(&self, x: &FeatureVector) -> Result<f64> {
        self.base.positive_probability(x)
    }

    fn slot_caps(&self, x: &FeatureVector, z: &CoefficientMatrix, configured: &[f64]) -> Result<Vec<f64>> {
        self.base.slot_caps(x, z, configured)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn fv(a: f64, b: f64) -> FeatureVector {
        FeatureVector::new(vec![a, b]).unwrap()
    }

    #[test]
    fn gaussian_posterior_examples() {
        assert!((gaussian_posterior_truth(&fv(3.0, -3.0)) - 0.5).abs() < 1e-15);
        let far = gaussian_posterior_truth(&fv(10.0, 10.0));
        assert!((far - 2.0611536181902037e-9).abs() < 1e-12 * far);
        let near = gaussian_posterior_truth(&fv(-10.0, -10.0));
        assert!((near - (1.0 - 2.0611536181902037e-9)).abs() < 1e-15);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(threshold_truth(&fv(-1.0, -1.0)), 1.0);
        assert_eq!(threshold_truth(&fv(-1.0, 1.0)), 0.0);
        assert_eq!(threshold_truth(&fv(0.0, 0.0)), 1.0);
    }

    #[test]
    fn youtube_examples() {
        assert!((youtube_truth(&fv(0.5, 5.0)) - 0.675).abs() < 1e-12);
        assert_eq!(youtube_truth(&fv(0.3, 3.0)), 1.0);
        assert_eq!(youtube_truth(&fv(0.0, 10.0)), 0.0);
    }

    #[test]
    fn truth_rejects_wrong_dimension() {
        let x = FeatureVector::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(GroundTruth::Threshold.probability(&x).is_err());
    }

    #[test]
    fn gaussian_dataset_properties() {
        assert!(gen_gaussian_dataset(0, 1).is_err());
        assert_eq!(gen_gaussian_dataset(6600, 1).unwrap().len(), 6600);
        assert_eq!(gen_gaussian_dataset(50, 9).unwrap(), gen_gaussian_dataset(50, 9).unwrap());

        let data = gen_gaussian_dataset(20_000, 4).unwrap();
        let negatives: Vec<_> = data.iter().filter(|r| r.label == Label::Negative).collect();
        assert!(negatives.len() > 9000);
        for d in 0..2 {
            let mean = negatives.iter().map(|r| r.features[d]).sum::<f64>() / negatives.len() as f64;
            assert!((mean - 10.0).abs() < 0.3, "coordinate {d} mean {mean}");
        }
    }

    #[test]
    fn youtube_dataset_properties() {
        assert!(gen_youtube_dataset(0, 1).is_err());
        let data = gen_youtube_dataset(20_000, 5).unwrap();
        assert_eq!(gen_youtube_dataset(2269, 3).unwrap().len(), 2269);
        for rec in &data {
            assert!((0.04..=1.0).contains(&rec.features[0]));
            assert!((0.0..=10.0).contains(&rec.features[1]));
            if rec.features[1] < 4.0 {
                assert_eq!(rec.label, Label::Positive);
            }
        }
        let slice: Vec<_> = data
            .iter()
            .filter(|r| r.features[1] >= 4.0 && r.features[0] >= 0.95)
            .collect();
        let freq = slice.iter().filter(|r| r.label == Label::Positive).count() as f64 / slice.len() as f64;
        let centre = rtt_complaint_curve(0.975).clamp(0.0, 1.0);
        assert!((freq - centre).abs() < 0.05, "{freq} vs {centre}");
    }

    #[test]
    fn label_sampling() {
        let mut rng = SimRng::seed_from_u64(8);
        for _ in 0..1000 {
            assert_eq!(sample_label(0.0, &mut rng).unwrap(), Label::Negative);
            assert_eq!(sample_label(1.0, &mut rng).unwrap(), Label::Positive);
        }
        let hits = (0..10_000)
            .filter(|_| sample_label(0.3, &mut rng).unwrap() == Label::Positive)
            .count();
        assert!((hits as f64 / 10_000.0 - 0.3).abs() < 0.02);
        assert!(sample_label(1.5, &mut rng).is_err());
        assert!(sample_label(-0.1, &mut rng).is_err());
        assert_eq!(realize_label(0.6, LabelSampling::Threshold, &mut rng).unwrap(), Label::Positive);
        assert_eq!(realize_label(0.4, LabelSampling::Threshold, &mut rng).unwrap(), Label::Negative);
    }

    #[test]
    fn coefficient_sampling() {
        let mut rng = SimRng::seed_from_u64(12);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let z = sample_coeff_matrix(&mut rng);
            assert_eq!(z.get(0, 0), 0.0);
            sum += z.get(1, 0);
        }
        assert!((sum / 10_000.0 - 0.5).abs() < 0.02);
        let a: Vec<_> = (0..5).map(|_| sample_coeff_matrix(&mut SimRng::seed_from_u64(1))).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn effective_cap_examples() {
        let z = unit_bandwidth_matrix();
        let inf = [f64::INFINITY];
        assert_eq!(effective_cap(&fv(0.0, 5.0), &z, CapMode::Homogeneous, &inf).unwrap(), vec![15.0]);
        assert_eq!(effective_cap(&fv(0.0, 25.0), &z, CapMode::Homogeneous, &inf).unwrap(), vec![0.0]);
        let half = CoefficientMatrix::from_rows(&[&[0.0], &[0.5]]).unwrap();
        assert_eq!(effective_cap(&fv(0.0, 10.0), &half, CapMode::Heterogeneous, &inf).unwrap(), vec![20.0]);
        assert_eq!(effective_cap(&fv(0.0, 5.0), &z, CapMode::Homogeneous, &[4.0]).unwrap(), vec![4.0]);
        let zero = CoefficientMatrix::from_rows(&[&[0.0], &[0.0]]).unwrap();
        let cap = effective_cap(&fv(0.0, 19.0), &zero, CapMode::Heterogeneous, &inf).unwrap();
        assert_eq!(cap, vec![1e6]);
    }

    #[test]
    fn replay_walks_records_in_order() {
        let records = gen_gaussian_dataset(5, 2).unwrap();
        let mut env = Replay::new(Scenario::new(ScenarioKind::Gaussian, GroundTruth::Threshold), records.clone()).unwrap();
        let mut rng = SimRng::seed_from_u64(0);
        assert_eq!(env.initial_dataset(3, &mut rng).unwrap(), records[..3].to_vec());
        assert_eq!(env.arrival(&mut rng).unwrap(), records[3].features);
        assert_eq!(env.arrival(&mut rng).unwrap(), records[4].features);
        assert_eq!(env.arrival(&mut rng).unwrap(), records[0].features);
        assert!(env.initial_dataset(5, &mut rng).is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for kind in ScenarioKind::ALL {
            assert_eq!(kind.name().parse::<ScenarioKind>().unwrap(), kind);
        }
        assert!("mystery".parse::<ScenarioKind>().is_err());
    }

    proptest! {
        #[test]
        fn truths_are_probabilities(a in -100.0..100.0f64, b in -100.0..100.0f64) {
            let x = fv(a, b);
            for truth in [GroundTruth::GaussianPosterior, GroundTruth::Threshold, GroundTruth::Youtube] {
                let p = truth.probability(&x).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }

        #[test]
        fn posterior_matches_density_ratio(a in -30.0..30.0f64, b in -30.0..30.0f64) {
            let x = fv(a, b);
            // Direct density ratio with the shared normalizer cancelled.
            let log_density = |m: f64| -((a - m).powi(2) + (b - m).powi(2)) / (2.0 * GAUSSIAN_VARIANCE);
            let (lp, ln) = (log_density(-10.0), log_density(10.0));
            let top = lp.max(ln);
            let direct = libm::exp(lp - top) / (libm::exp(lp - top) + libm::exp(ln - top));
            prop_assert!((gaussian_posterior_truth(&x) - direct).abs() < 1e-12);
            // For these two clusters the log ratio collapses to x1 + x2.
            prop_assert!((gaussian_posterior_truth(&x) - sigmoid(a + b)).abs() < 1e-12);
        }
    }
}
