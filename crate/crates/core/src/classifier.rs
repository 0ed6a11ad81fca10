//! Logistic classifier trained by averaged gradient descent.
//!
//! The positive (complaint) probability of a feature vector `x` is
//! `1 / (1 + exp(-w0 - w·x))`. The loss is the mean negative log-likelihood
//! over the whole dataset (initial records plus one record per online slot),
//! so a step `w - η ∇loss` on the normalized loss is the same as a step of
//! `η / N` on the summed log-likelihood.

use alloc::vec::Vec;

use crate::domain::{ClassifierWeights, FeatureVector, UserRecord};
use crate::error::{check_dim, Error, Result};

/// Exponents are clamped to this magnitude before `exp`.
pub const EXPONENT_CLAMP: f64 = 700.0;
/// Probabilities inside `ln` are kept in `[PROB_FLOOR, 1 - PROB_FLOOR]`.
pub const PROB_FLOOR: f64 = 1e-15;

/// The decreasing logistic curve `1 / (1 + e^x)`.
///
/// Note the sign: this is the standard sigmoid evaluated at `-x`, so
/// `sigmoid(0) = 0.5`, `sigmoid(x) + sigmoid(-x) = 1` and large positive
/// arguments drive it to zero.
pub fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-EXPONENT_CLAMP, EXPONENT_CLAMP);
    if x >= 0.0 {
        let e = libm::exp(-x);
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + libm::exp(x))
    }
}

/// Derivative of [`sigmoid`]: `-e^x / (1 + e^x)^2`.
pub fn sigmoid_slope(x: f64) -> f64 {
    -sigmoid(x) * sigmoid(-x)
}

/// Predicted complaint probability `sigmoid(-w0 - w·x)`.
pub fn predict_positive(weights: &ClassifierWeights, x: &FeatureVector) -> Result<f64> {
    check_dim("predict_positive", weights.dim(), x.len())?;
    Ok(sigmoid(-weights.logit(x.as_slice())))
}

/// Initial records plus the records appended online, one per served user.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    initial: Vec<UserRecord>,
    online: Vec<UserRecord>,
}

impl Dataset {
    pub fn new(initial: Vec<UserRecord>) -> Self {
        Self {
            initial,
            online: Vec::new(),
        }
    }

    pub fn push(&mut self, record: UserRecord) {
        self.online.push(record);
    }

    pub fn initial(&self) -> &[UserRecord] {
        &self.initial
    }

    pub fn online(&self) -> &[UserRecord] {
        &self.online
    }

    /// `N_t = I + (records appended so far)`.
    pub fn len(&self) -> usize {
        self.initial.len() + self.online.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &UserRecord> {
        self.initial.iter().chain(self.online.iter())
    }

    fn check(&self, weights: &ClassifierWeights) -> Result<()> {
        let first = self.iter().next().ok_or(Error::EmptyDataset)?;
        check_dim("dataset features vs weights", weights.dim(), first.features.len())
    }
}

/// Gradient of [`cross_entropy_loss`] with respect to `(w0, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub intercept: f64,
    pub weights: Vec<f64>,
}

impl LossGradient {
    pub fn norm_sq(&self) -> f64 {
        self.intercept * self.intercept + self.weights.iter().map(|g| g * g).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }
}

/// Mean negative log-likelihood of the labels under `weights`.
pub fn cross_entropy_loss(weights: &ClassifierWeights, data: &Dataset) -> Result<f64> {
    data.check(weights)?;
    let total: f64 = data
        .iter()
        .map(|rec| {
            let p = sigmoid(-weights.logit(rec.features.as_slice()))
                .clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            let y = rec.label.as_f64();
            -(y * libm::log(p) + (1.0 - y) * libm::log(1.0 - p))
        })
        .sum();
    Ok(total / data.len() as f64)
}

/// Mean over records of `(p_n - y_n) · [1, x_n]`.
pub fn loss_gradient(weights: &ClassifierWeights, data: &Dataset) -> Result<LossGradient> {
    data.check(weights)?;
    let mut grad = LossGradient {
        intercept: 0.0,
        weights: alloc::vec![0.0; weights.dim()],
    };
    for rec in data.iter() {
        let x = rec.features.as_slice();
        let residual = sigmoid(-weights.logit(x)) - rec.label.as_f64();
        grad.intercept += residual;
        for (g, v) in grad.weights.iter_mut().zip(x) {
            *g += residual * v;
        }
    }
    let n = data.len() as f64;
    grad.intercept /= n;
    grad.weights.iter_mut().for_each(|g| *g /= n);
    Ok(grad)
}

/// Step size of slot `t`: `η₀ / (t + 1)`.
pub fn step_size(t: usize, eta0: f64) -> f64 {
    eta0 / (t as f64 + 1.0)
}

/// `weights - eta · grad`.
pub fn descend(weights: &ClassifierWeights, grad: &LossGradient, eta: f64) -> ClassifierWeights {
    ClassifierWeights {
        intercept: weights.intercept - eta * grad.intercept,
        weights: weights
            .weights
            .iter()
            .zip(&grad.weights)
            .map(|(w, g)| w - eta * g)
            .collect(),
    }
}

/// One online update after slot `t`'s records were appended to `data`.
pub fn agd_step(
    weights: &ClassifierWeights,
    data: &Dataset,
    t: usize,
    eta0: f64,
) -> Result<ClassifierWeights> {
    if t == 0 {
        return Err(Error::invalid("online slots are numbered from 1"));
    }
    let grad = loss_gradient(weights, data)?;
    Ok(descend(weights, &grad, step_size(t, eta0)))
}

/// Upper bound on the smoothness constant of the loss: `max ‖[1, x]‖² / 4`.
pub fn smoothness_bound(data: &Dataset) -> f64 {
    data.iter()
        .map(|rec| 1.0 + rec.features.as_slice().iter().map(|v| v * v).sum::<f64>())
        .fold(0.0, f64::max)
        / 4.0
}

/// Settings for the batch fit on the initial dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iters: usize,
    /// Fixed step; `None` uses `1 / smoothness_bound(data)`.
    pub eta: Option<f64>,
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            eta: None,
            tol: 1e-6,
        }
    }
}

/// Batch gradient descent from zero weights until `‖∇‖ < tol` or
/// `max_iters` steps have been taken.
pub fn fit_initial(data: &Dataset, max_iters: usize, eta: f64, tol: f64) -> Result<ClassifierWeights> {
    let first = data.iter().next().ok_or(Error::EmptyDataset)?;
    let mut weights = ClassifierWeights::zeros(first.features.len());
    for _ in 0..max_iters {
        let grad = loss_gradient(&weights, data)?;
        if grad.norm() < tol {
            break;
        }
        weights = descend(&weights, &grad, eta);
    }
    Ok(weights)
}

pub fn fit_with(data: &Dataset, opts: FitOptions) -> Result<ClassifierWeights> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let eta = opts.eta.unwrap_or_else(|| 1.0 / smoothness_bound(data));
    fit_initial(data, opts.max_iters, eta, opts.tol)
}
