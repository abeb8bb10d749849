//! JSON documents for trajectories, matrices and estimator reports.
//!
//! Matrices are nested row lists. `serde_json` prints the shortest decimal
//! that parses back to the same `f64`, so entries round-trip exactly.

use std::fs;
use std::path::Path;

use manifold_ar_core::arproc::{ManifoldKind, Trajectory};
use manifold_ar_core::matcore::OrthoMatrix;
use manifold_ar_core::sysid::EstimateReport;
use manifold_ar_core::Mat;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Context, HarnessError, Result};

/// Manifold family without dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Orthogonal,
    Stiefel,
    Grassmann,
}

impl Family {
    /// `k` is ignored on O(n).
    pub fn kind(self, n: usize, k: usize) -> manifold_ar_core::Result<ManifoldKind> {
        match self {
            Self::Orthogonal => ManifoldKind::orthogonal(n),
            Self::Stiefel => ManifoldKind::stiefel(n, k),
            Self::Grassmann => ManifoldKind::grassmann(n, k),
        }
    }

    pub fn of(kind: ManifoldKind) -> Self {
        match kind {
            ManifoldKind::Orthogonal { .. } => Self::Orthogonal,
            ManifoldKind::Stiefel { .. } => Self::Stiefel,
            ManifoldKind::Grassmann { .. } => Self::Grassmann,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Orthogonal => "orthogonal",
            Self::Stiefel => "stiefel",
            Self::Grassmann => "grassmann",
        }
    }

    /// Stable tag mixed into derived seeds.
    pub(crate) fn tag(self) -> u64 {
        match self {
            Self::Orthogonal => 0,
            Self::Stiefel => 1,
            Self::Grassmann => 2,
        }
    }
}

pub type Rows = Vec<Vec<f64>>;

pub fn matrix_to_rows(m: &Mat) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn rows_to_matrix(rows: &Rows) -> std::result::Result<Mat, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err("matrix must be nonempty".into());
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("matrix rows have different lengths".into());
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryDoc {
    pub manifold: Family,
    pub n: usize,
    pub k: usize,
    pub sigma: f64,
    pub seed: u64,
    pub phi_true: Option<Rows>,
    pub points: Vec<Rows>,
}

impl TrajectoryDoc {
    pub fn from_trajectory(t: &Trajectory) -> Self {
        let kind = t.kind();
        Self {
            manifold: Family::of(kind),
            n: kind.n(),
            k: kind.k(),
            sigma: t.sigma(),
            seed: t.seed(),
            phi_true: t.phi_true().map(|p| matrix_to_rows(p.as_matrix())),
            points: t.points().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn into_trajectory(self) -> Result<Trajectory> {
        let kind = self.manifold.kind(self.n, self.k).context("trajectory document")?;
        let points = self
            .points
            .iter()
            .map(rows_to_matrix)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(HarnessError::config)?;
        let phi = match &self.phi_true {
            Some(rows) => {
                let m = rows_to_matrix(rows).map_err(HarnessError::config)?;
                Some(OrthoMatrix::new(m).context("phi_true")?)
            }
            None => None,
        };
        Trajectory::new(kind, points, self.sigma, phi, self.seed).context("trajectory document")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub phi_hat: Rows,
    pub error: Option<f64>,
    pub final_cost: f64,
    pub outer_iterations: usize,
    pub inner_steps: usize,
    pub converged: bool,
    pub tol: f64,
    pub wall_time_ms: f64,
}

impl From<&EstimateReport> for ReportDoc {
    fn from(r: &EstimateReport) -> Self {
        Self {
            phi_hat: matrix_to_rows(r.phi_hat.as_matrix()),
            error: r.error,
            final_cost: r.final_cost,
            outer_iterations: r.outer_iterations,
            inner_steps: r.inner_steps,
            converged: r.converged,
            tol: r.tolerance_used,
            wall_time_ms: r.wall_time.as_secs_f64() * 1e3,
        }
    }
}

/// Read an orthogonal matrix stored as nested rows.
pub fn read_ortho(path: &Path) -> Result<OrthoMatrix> {
    let rows: Rows = read_json(path)?;
    let m = rows_to_matrix(&rows).map_err(|e| HarnessError::parse(path, e))?;
    OrthoMatrix::new(m).context("initial parameter")
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::parse(path, e))
}

/// Pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| HarnessError::io(p, e)),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| HarnessError::io("<stdout>", e))
        }
    }
}
