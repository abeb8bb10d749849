//! Experiment configuration, read from JSON with snake_case field names.

use std::path::PathBuf;

use manifold_ar_core::sysid::{BasisOrder, CgSettings, Conjugation, EstimatorSettings};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::format::Family;

pub const DEFAULT_SCALE: f64 = 0.01;
pub const DEFAULT_TRIALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ConjugationChoice {
    Frobenius,
    Curvature,
}

/// Estimator knobs. Absent fields take the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    pub tol: Option<f64>,
    pub max_outer: Option<usize>,
    pub grid_size: Option<usize>,
    pub restart: Option<usize>,
    pub conjugation: Option<ConjugationChoice>,
    pub unit_direction: Option<bool>,
    pub reversed_basis: Option<bool>,
    pub karcher_tol: Option<f64>,
    pub karcher_max_iter: Option<usize>,
}

impl EstimatorConfig {
    pub fn settings(&self) -> Result<EstimatorSettings> {
        let d = EstimatorSettings::default();
        let cg = CgSettings {
            tol: self.tol.unwrap_or(d.cg.tol),
            max_outer: self.max_outer.unwrap_or(d.cg.max_outer),
            grid_size: self.grid_size.unwrap_or(d.cg.grid_size),
            restart: self.restart.or(d.cg.restart),
            basis_order: match self.reversed_basis {
                Some(true) => BasisOrder::Reversed,
                _ => d.cg.basis_order,
            },
            conjugation: match self.conjugation {
                Some(ConjugationChoice::Frobenius) => Conjugation::Frobenius,
                Some(ConjugationChoice::Curvature) => Conjugation::Curvature,
                None => d.cg.conjugation,
            },
            unit_direction: self.unit_direction.unwrap_or(d.cg.unit_direction),
        };
        cg.validate()
            .map_err(|e| HarnessError::config(format!("estimator: {e}")))?;
        let s = EstimatorSettings {
            karcher_tol: self.karcher_tol.unwrap_or(d.karcher_tol),
            karcher_max_iter: self.karcher_max_iter.unwrap_or(d.karcher_max_iter),
            cg,
        };
        if !(s.karcher_tol > 0.0 && s.karcher_tol.is_finite()) || s.karcher_max_iter == 0 {
            return Err(HarnessError::config("estimator: Karcher tolerance and iteration cap must be positive"));
        }
        Ok(s)
    }
}

/// Grid of experiments: every combination of `n`, `k`, `steps` and
/// `sigma`, each repeated `trials` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub manifold: Family,
    pub n: Vec<usize>,
    /// Ignored on O(n); may be omitted there.
    #[serde(default)]
    pub k: Vec<usize>,
    /// Trajectory lengths `N`.
    pub steps: Vec<usize>,
    pub sigma: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Scale of the half-normal law of `dist(Φ, I)`.
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Fill `runtime_ms`. Off by default so that output files are
    /// reproducible byte for byte.
    #[serde(default)]
    pub record_runtime: bool,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_scale() -> f64 {
    DEFAULT_SCALE
}

/// One point of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub k: usize,
    pub steps: usize,
    pub sigma: f64,
}

impl SweepConfig {
    pub fn new(manifold: Family, n: Vec<usize>, k: Vec<usize>, steps: Vec<usize>, sigma: Vec<f64>) -> Self {
        Self {
            manifold,
            n,
            k,
            steps,
            sigma,
            trials: DEFAULT_TRIALS,
            master_seed: 0,
            estimator: EstimatorConfig::default(),
            out: None,
            scale: DEFAULT_SCALE,
            record_runtime: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let square = self.manifold == Family::Orthogonal;
        if self.n.is_empty() || self.steps.is_empty() || self.sigma.is_empty() || (!square && self.k.is_empty()) {
            return Err(HarnessError::config("n, k, steps and sigma need at least one value each"));
        }
        if self.trials == 0 {
            return Err(HarnessError::config("trials must be at least 1"));
        }
        if self.n.contains(&0) || self.steps.contains(&0) {
            return Err(HarnessError::config("n and steps must be positive"));
        }
        if !square {
            for &n in &self.n {
                for &k in &self.k {
                    if k == 0 || k >= n {
                        return Err(HarnessError::config(format!("need 0 < k < n, got n = {n}, k = {k}")));
                    }
                }
            }
        }
        if self.sigma.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(HarnessError::config("sigma values must be finite and nonnegative"));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(HarnessError::config("scale must be positive"));
        }
        self.estimator.settings()?;
        Ok(())
    }

    /// Grid cells in `n`, `k`, `steps`, `sigma` order (last varies fastest).
    pub fn cells(&self) -> Vec<Cell> {
        let ks = if self.manifold == Family::Orthogonal { None } else { Some(&self.k) };
        let mut out = Vec::new();
        for &n in &self.n {
            let kk: Vec<usize> = ks.cloned().unwrap_or_else(|| vec![n]);
            for &k in &kk {
                for &steps in &self.steps {
                    for &sigma in &self.sigma {
                        out.push(Cell {
                            index: out.len(),
                            n,
                            k,
                            steps,
                            sigma,
                        });
                    }
                }
            }
        }
        out
    }
}
