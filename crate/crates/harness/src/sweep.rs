//! Seeded sweeps over the experiment grid.

use manifold_ar_core::arproc::{sample_system_parameter, simulate_ar1, ProcessSpec};
use manifold_ar_core::rng::derive_seed;
use manifold_ar_core::sysid::{estimate, EstimateReport, EstimatorSettings};
use manifold_ar_core::RandomStream;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, SweepConfig};
use crate::error::Result;
use crate::format::Family;

/// One trial of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub manifold: Family,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "N")]
    pub steps: usize,
    pub sigma: f64,
    pub trial: usize,
    pub seed: u64,
    /// `dist(Φ, Φ̂)`; absent when the trial failed.
    pub error: Option<f64>,
    pub final_cost: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Estimator wall time, or 0 unless the sweep records timing.
    pub runtime_ms: f64,
}

/// Seed of a trial. It depends on the cell's values rather than its
/// position, so editing the grid never reseeds the cells that remain.
pub fn trial_seed(master: u64, family: Family, cell: &Cell, trial: usize) -> u64 {
    derive_seed(
        master,
        &[
            family.tag(),
            cell.n as u64,
            cell.k as u64,
            cell.steps as u64,
            cell.sigma.to_bits(),
            trial as u64,
        ],
    )
}

/// Run every trial of every cell. Rows come back ordered by cell, then
/// trial, whatever the scheduling. A failing trial yields a row with
/// `converged = false` and no error value instead of aborting the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let settings = cfg.estimator.settings()?;
    let jobs: Vec<(Cell, usize)> = cfg
        .cells()
        .into_iter()
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|(cell, trial)| run_trial(cfg, &settings, cell, *trial))
        .collect())
}

fn run_trial(cfg: &SweepConfig, settings: &EstimatorSettings, cell: &Cell, trial: usize) -> ResultRow {
    let seed = trial_seed(cfg.master_seed, cfg.manifold, cell, trial);
    let outcome = simulate_and_estimate(cfg.manifold, cell, cfg.scale, seed, settings);
    row_for(cfg, cell, trial, seed, outcome)
}

fn row_for(
    cfg: &SweepConfig,
    cell: &Cell,
    trial: usize,
    seed: u64,
    outcome: manifold_ar_core::Result<EstimateReport>,
) -> ResultRow {
    let mut row = ResultRow {
        manifold: cfg.manifold,
        n: cell.n,
        k: cell.k,
        steps: cell.steps,
        sigma: cell.sigma,
        trial,
        seed,
        error: None,
        final_cost: None,
        iterations: 0,
        converged: false,
        runtime_ms: 0.0,
    };
    if let Ok(report) = outcome {
        row.error = report.error;
        row.final_cost = Some(report.final_cost);
        row.iterations = report.outer_iterations;
        row.converged = report.converged;
        if cfg.record_runtime {
            row.runtime_ms = report.wall_time.as_secs_f64() * 1e3;
        }
    }
    row
}

/// Process for one trial: `Φ` from a substream of `seed`, noise from
/// `seed` itself, start at the canonical point.
pub fn sample_process(family: Family, cell: &Cell, scale: f64, seed: u64) -> manifold_ar_core::Result<ProcessSpec> {
    let kind = family.kind(cell.n, cell.k)?;
    let mut rng = RandomStream::derive(seed, &[PHI_STREAM]);
    let phi = sample_system_parameter(cell.n, scale, &mut rng)?;
    let spec = ProcessSpec::new(kind, phi, cell.sigma, cell.steps, seed);
    spec.validate()?;
    Ok(spec)
}

const PHI_STREAM: u64 = 1;

/// Simulate [`sample_process`] and estimate with the estimator matching
/// the manifold, starting from `Φ0 = I`.
pub fn simulate_and_estimate(
    family: Family,
    cell: &Cell,
    scale: f64,
    seed: u64,
    settings: &EstimatorSettings,
) -> manifold_ar_core::Result<EstimateReport> {
    let traj = simulate_ar1(&sample_process(family, cell, scale, seed)?)?;
    estimate(&traj, None, settings)
}
