//! Estimators of the system parameter `Φ`: per-step inversion followed by
//! a Karcher mean on O(n), and conjugate-gradient descent on the
//! rational-approximation costs on St(n,k) and Gr(n,k).

mod cg;
mod cost;

use alloc::vec::Vec;
use core::time::Duration;

use crate::arproc::{karcher_mean_points, Trajectory};
use crate::manifolds::ortho_dist;
use crate::matcore::OrthoMatrix;
use crate::Result;

pub use cg::{estimate_cg, line_search, BasisOrder, CgSettings, Conjugation, LINE_SEARCH_WIDTH};
pub use cost::{
    grassmann_cost, grassmann_gradient, stiefel_cost, stiefel_gradient, CostContext, CostKind,
    LineCost, StepTerm,
};

/// Outcome of an estimator run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub phi_hat: OrthoMatrix,
    /// `ortho_dist(Φ, Φ̂)` when the trajectory carries the true `Φ`.
    pub error: Option<f64>,
    pub final_cost: f64,
    pub outer_iterations: usize,
    pub inner_steps: usize,
    pub converged: bool,
    pub tolerance_used: f64,
    /// Zero when built without the `std` feature.
    pub wall_time: Duration,
    /// Cost at the start and after every accepted step.
    pub cost_history: Vec<f64>,
}

#[cfg(feature = "std")]
pub(crate) struct Timer(std::time::Instant);

#[cfg(feature = "std")]
impl Timer {
    pub(crate) fn start() -> Self {
        Self(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
pub(crate) fn elapsed(t: &Timer) -> Duration {
    t.0.elapsed()
}

#[cfg(not(feature = "std"))]
pub(crate) struct Timer;

#[cfg(not(feature = "std"))]
impl Timer {
    pub(crate) fn start() -> Self {
        Self
    }
}

#[cfg(not(feature = "std"))]
pub(crate) fn elapsed(_: &Timer) -> Duration {
    Duration::ZERO
}

/// `Φ̂_ℓ = Y_{ℓ+1}·Y_ℓᵀ` for every consecutive pair of an O(n) trajectory.
pub fn stepwise_estimates(traj: &Trajectory) -> Result<Vec<OrthoMatrix>> {
    let pts = traj.orthogonal_points()?;
    Ok(pts
        .windows(2)
        .map(|w| OrthoMatrix::from_matrix_unchecked(w[1].as_matrix() * w[0].as_matrix().transpose()))
        .collect())
}

/// Karcher mean of the stepwise estimates. Non-convergence is reported in
/// the result, not as an error. `final_cost` is `Σ_ℓ ortho_dist(Y_{ℓ+1}, Φ̂Y_ℓ)²`.
pub fn estimate_orthogonal(traj: &Trajectory, tol: f64, max_iter: usize) -> Result<EstimateReport> {
    let timer = Timer::start();
    let estimates = stepwise_estimates(traj)?;
    let mean = karcher_mean_points(&estimates, tol, max_iter)?;
    let phi_hat = mean.point;
    let pts = traj.orthogonal_points()?;
    let mut cost = 0.0;
    for w in pts.windows(2) {
        let d = ortho_dist(&w[1], &(&phi_hat * &w[0]))?;
        cost += d * d;
    }
    let error = traj.phi_true().map(|t| ortho_dist(t, &phi_hat)).transpose()?;
    Ok(EstimateReport {
        phi_hat,
        error,
        final_cost: cost,
        outer_iterations: mean.iterations,
        inner_steps: 0,
        converged: mean.converged,
        tolerance_used: tol,
        wall_time: elapsed(&timer),
        cost_history: alloc::vec![cost],
    })
}

/// Settings for [`estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSettings {
    pub karcher_tol: f64,
    pub karcher_max_iter: usize,
    pub cg: CgSettings,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            karcher_tol: crate::arproc::KARCHER_TOL,
            karcher_max_iter: crate::arproc::KARCHER_MAX_ITER,
            cg: CgSettings::default(),
        }
    }
}

/// Run the estimator matching the trajectory's manifold. `phi0` (default
/// `I_n`) is only used by the gradient method.
pub fn estimate(
    traj: &Trajectory,
    phi0: Option<&OrthoMatrix>,
    settings: &EstimatorSettings,
) -> Result<EstimateReport> {
    match traj.kind() {
        crate::arproc::ManifoldKind::Orthogonal { .. } => {
            estimate_orthogonal(traj, settings.karcher_tol, settings.karcher_max_iter)
        }
        kind => {
            let identity = OrthoMatrix::identity(kind.n());
            estimate_cg(traj, phi0.unwrap_or(&identity), &settings.cg)
        }
    }
}
