//! Experiment harness around `cora-core`: dataset and trace files, the
//! config file format, parallel Monte Carlo trials, sweeps, the allocator
//! oracle check and the `cora-sim` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod files;
pub mod floats;
pub mod oracle;
pub mod sweep;
pub mod trials;

pub use error::{SimError, SimResult};
