//! Experiment runner around `manifold-ar-core`: JSON documents for
//! trajectories and reports, seeded parameter sweeps with CSV/JSON
//! output, scaling-law fits and a finite-difference gradient audit.

pub mod config;
pub mod emit;
pub mod error;
pub mod format;
pub mod gradcheck;
pub mod stats;
pub mod sweep;

pub use config::{EstimatorConfig, SweepConfig};
pub use emit::{emit, read_rows, Format};
pub use error::{HarnessError, Result};
pub use format::Family;
pub use stats::{fit_slope, spearman, SlopeFit, XField};
pub use sweep::{run_sweep, ResultRow};
