//! Upper-confidence estimate of the coefficient matrix.
//!
//! Every entry `(d, k)` is an arm whose reward is the observed coefficient,
//! weighted by how much of resource `k` was spent. The index is
//! `ψ̄ + c·sqrt(ln T / L)`, where `L` counts resource units (not pulls) and `T`
//! is the run's full horizon.

use alloc::vec::Vec;

use crate::domain::{CoefficientMatrix, ResourceVector};
use crate::error::{check_dim, Error, Result};

/// Index of an entry that has never been observed. Coefficients live in
/// `[0, 1]`, so this is the most optimistic honest value.
pub const UNPULLED_INDEX: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    rows: usize,
    cols: usize,
    means: Vec<f64>,
    units: Vec<f64>,
    explore: f64,
    horizon: usize,
}

impl BanditState {
    pub fn new(rows: usize, cols: usize, explore: f64, horizon: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("bandit needs at least one entry"));
        }
        if horizon < 2 {
            return Err(Error::invalid("bandit horizon must be at least 2"));
        }
        if !explore.is_finite() || explore < 0.0 {
            return Err(Error::invalid("exploration coefficient must be finite and nonnegative"));
        }
        Ok(Self {
            rows,
            cols,
            means: alloc::vec![0.0; rows * cols],
            units: alloc::vec![0.0; rows * cols],
            explore,
            horizon,
        })
    }

    /// Running mean `ψ̄_{d,k}`.
    pub fn mean(&self, d: usize, k: usize) -> f64 {
        self.means[d * self.cols + k]
    }

    /// Resource units observed so far for entry `(d, k)`.
    pub fn units(&self, d: usize, k: usize) -> f64 {
        self.units[d * self.cols + k]
    }

    pub fn ucb_index(&self) -> CoefficientMatrix {
        let bonus_scale = libm::log(self.horizon as f64);
        let entries = self
            .means
            .iter()
            .zip(&self.units)
            .map(|(&m, &l)| {
                if l > 0.0 {
                    m + self.explore * libm::sqrt(bonus_scale / l)
                } else {
                    UNPULLED_INDEX
                }
            })
            .collect();
        CoefficientMatrix::new(self.rows, self.cols, entries).expect("shape fixed at construction")
    }

    /// Folds in the true coefficients seen while spending `r`.
    pub fn observe(&mut self, z: &CoefficientMatrix, r: &ResourceVector) -> Result<()> {
        check_dim("bandit observe rows", self.rows, z.rows())?;
        check_dim("bandit observe cols", self.cols, z.cols())?;
        check_dim("bandit observe allocation", self.cols, r.len())?;
        for k in 0..self.cols {
            let spent = r[k];
            if spent <= 0.0 {
                continue;
            }
            for d in 0..self.rows {
                let i = d * self.cols + k;
                let total = self.units[i] + spent;
                self.means[i] = (self.means[i] * self.units[i] + z.get(d, k) * spent) / total;
                self.units[i] = total;
            }
        }
        Ok(())
    }
}
