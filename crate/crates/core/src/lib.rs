//! Closed-loop online resource allocation.
//!
//! A logistic classifier learns which feature vectors lead to complaints, a
//! per-slot allocator spends resources where they lower the predicted
//! complaint probability the most, and virtual queues keep the long-run
//! average spend under budget. For heterogeneous users the resource effect
//! matrix is estimated online with an upper-confidence-bound rule.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the command line lives in the `cora-sim` crate.
//!
//! Module map:
//!
//! - [`domain`]: value types shared by everything else.
//! - [`classifier`]: cross-entropy loss, gradient and averaged gradient steps.
//! - [`lyapunov`]: virtual queue updates and drift-plus-penalty diagnostics.
//! - [`allocator`]: the per-slot KKT candidate solver and a grid oracle.
//! - [`bandit`]: UCB estimation of the coefficient matrix.
//! - [`environment`]: ground truths and synthetic user generators.
//! - [`engine`]: the closed loops (OOQRA, ROQRA, dual-price baseline).

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod allocator;
pub mod bandit;
pub mod classifier;
pub mod domain;
pub mod engine;
pub mod environment;
mod error;
pub mod lyapunov;

pub use error::{Error, Result};

/// Deterministic generator used for every stochastic draw in a run.
pub type SimRng = rand_chacha::ChaCha8Rng;
