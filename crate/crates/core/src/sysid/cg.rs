//! Conjugate-gradient descent on O(n) for the St/Gr costs.

use alloc::vec::Vec;

use super::cost::CostContext;
use super::{elapsed, EstimateReport, Timer};
use crate::arproc::Trajectory;
use crate::manifolds::ortho_dist;
use crate::matcore::{gram_schmidt, so_basis, AntisymMatrix, OrthoMatrix};
use crate::{Error, Result};

/// Width at which golden-section refinement stops.
pub const LINE_SEARCH_WIDTH: f64 = 1e-10;

/// Enumeration order of the 𝔬(n) basis used to assemble gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasisOrder {
    #[default]
    Canonical,
    Reversed,
}

/// Inner product used to orthogonalize a new gradient against the
/// directions already taken in the current sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conjugation {
    /// Frobenius inner product on 𝔬(n).
    Frobenius,
    /// Curvature inner product `⟨u, Hv⟩`, with `H·d_k` estimated from the
    /// gradient change across step `k`.
    #[default]
    Curvature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSettings {
    /// A sweep ends after a step moving less than this; the run converges
    /// once a whole sweep moves less than this.
    pub tol: f64,
    pub max_outer: usize,
    /// Odd number of grid points on `[−1, 1]`.
    pub grid_size: usize,
    /// Steps per sweep; `None` means `n(n−1)/2`.
    pub restart: Option<usize>,
    pub basis_order: BasisOrder,
    pub conjugation: Conjugation,
    /// Rescale each search direction to unit Frobenius norm before the
    /// line search, making `τ` a geodesic step length.
    pub unit_direction: bool,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_outer: 100,
            grid_size: 51,
            restart: None,
            basis_order: BasisOrder::Canonical,
            conjugation: Conjugation::default(),
            unit_direction: true,
        }
    }
}

impl CgSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter("tol must be positive"));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidParameter("max_outer must be positive"));
        }
        check_grid(self.grid_size)?;
        if self.restart == Some(0) {
            return Err(Error::InvalidParameter("restart period must be positive"));
        }
        Ok(())
    }
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 3 || grid.is_multiple_of(2) {
        return Err(Error::InvalidParameter("line-search grid must be odd and at least 3"));
    }
    Ok(())
}

/// Minimize `g` over `[−1, 1]`: a uniform grid of `grid` points (which
/// contains 0 and ±1) followed by golden-section refinement around the
/// best grid point. Returns `(τ, g(τ))` with `g(τ) ≤ g(0)`; ties go to
/// `τ = 0`.
///
/// Out-of-chart errors away from `τ = 0` mark that `τ` as infeasible. A
/// non-finite value is a [`Error::LineSearch`] failure.
pub fn line_search<F>(mut g: F, grid: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    check_grid(grid)?;
    let mut eval = |tau: f64| -> Result<f64> {
        match g(tau) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(Error::LineSearch { tau }),
            Err(Error::OutOfChart { .. }) if tau != 0.0 => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let half = (grid - 1) / 2;
    let tau_at = |i: usize| (i as f64 - half as f64) / half as f64;
    let mut values = Vec::with_capacity(grid);
    for i in 0..grid {
        values.push(if i == half { eval(0.0)? } else { eval(tau_at(i))? });
    }
    let mut best = half;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    let (mut lo, mut hi) = (tau_at(best.saturating_sub(1)), tau_at((best + 1).min(grid - 1)));
    let (best_tau, best_value) = (tau_at(best), values[best]);

    let ratio = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > LINE_SEARCH_WIDTH {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    let (tau, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if value < best_value {
        Ok((tau, value))
    } else {
        Ok((best_tau, best_value))
    }
}

/// Rounding level of a composed-cost evaluation.
fn noise_floor(cost: f64, ctx: &CostContext) -> f64 {
    4.0 * f64::EPSILON * cost.abs() * ctx.points().len() as f64
}

/// Conjugate Gram–Schmidt: `g − Σ_k (⟨g, y_k⟩/⟨d_k, y_k⟩)·d_k` where
/// `y_k` is the gradient change across step `k`, proportional to `H·d_k`.
fn conjugate(
    grad: &AntisymMatrix,
    directions: &[AntisymMatrix],
    secants: &[Option<AntisymMatrix>],
) -> Option<AntisymMatrix> {
    let norm = grad.norm();
    if norm == 0.0 {
        return None;
    }
    let mut d = grad.as_matrix().clone();
    for (dk, yk) in directions.iter().zip(secants) {
        let Some(yk) = yk else { continue };
        let curv = dk.inner(yk);
        if curv == 0.0 || !curv.is_finite() {
            continue;
        }
        let beta = grad.inner(yk) / curv;
        d -= dk.as_matrix() * beta;
    }
    if d.norm() < 1e-12 * norm {
        None
    } else {
        Some(AntisymMatrix::from_matrix_unchecked(d))
    }
}

/// Estimate `Φ` from a St or Gr trajectory by conjugate-gradient descent
/// on the rational-approximation cost, starting from `phi0`.
///
/// Each sweep starts from the raw gradient; later steps of the sweep use
/// the gradient orthogonalized against the sweep's earlier directions in
/// the inner product chosen by [`Conjugation`]. The update is `Φ ← Φ·expm(−τΔ)` with `τ` from
/// [`line_search`].
pub fn estimate_cg(traj: &Trajectory, phi0: &OrthoMatrix, settings: &CgSettings) -> Result<EstimateReport> {
    settings.validate()?;
    let timer = Timer::start();
    let ctx = CostContext::new(traj)?;
    let n = ctx.n();
    if phi0.dim() != n {
        return Err(Error::shape((n, n), phi0.as_matrix().shape()));
    }
    let mut basis = if n >= 2 { so_basis(n)? } else { Vec::new() };
    if settings.basis_order == BasisOrder::Reversed {
        basis.reverse();
    }
    let restart = settings.restart.unwrap_or((n * (n - 1) / 2).max(1));

    let mut phi = phi0.clone();
    let mut cost = ctx.composed_cost(&phi)?;
    let mut history = alloc::vec![cost];
    let (mut outer, mut inner, mut converged) = (0, 0, false);

    'sweeps: while outer < settings.max_outer {
        outer += 1;
        phi = phi.reorthonormalized();
        cost = ctx.composed_cost(&phi)?;
        let mut directions: Vec<AntisymMatrix> = Vec::new();
        // gradient differences across each accepted step (curvature mode)
        let mut secants: Vec<Option<AntisymMatrix>> = Vec::new();
        let mut grad = ctx.gradient_in_basis(&phi, &basis)?;
        let mut swept = 0.0;
        for s in 0..restart {
            let delta = if s == 0 {
                if grad.norm() == 0.0 {
                    converged = true;
                    break 'sweeps;
                }
                grad.clone()
            } else {
                let next = match settings.conjugation {
                    Conjugation::Frobenius => gram_schmidt(&grad, &directions),
                    Conjugation::Curvature => conjugate(&grad, &directions, &secants),
                };
                match next {
                    Some(d) => d,
                    None => break,
                }
            };
            let delta = if settings.unit_direction {
                delta.scale(1.0 / delta.norm())
            } else {
                delta
            };
            let line = ctx.along(&phi, &delta)?;
            let (tau, value) = line_search(|t| line.eval(t), settings.grid_size)?;
            // a decrease within rounding of the cost is not progress
            let tau = if value < cost - noise_floor(cost, &ctx) { tau } else { 0.0 };
            let mut secant = None;
            if tau != 0.0 {
                phi = line.point(tau)?;
                cost = value;
                history.push(cost);
                inner += 1;
                let next = ctx.gradient_in_basis(&phi, &basis)?;
                secant = Some(&next - &grad);
                grad = next;
            }
            let moved = delta.norm() * tau.abs();
            swept += moved;
            directions.push(delta);
            secants.push(secant);
            if moved < settings.tol {
                break;
            }
        }
        if swept < settings.tol {
            converged = true;
            break;
        }
    }

    let error = traj.phi_true().map(|t| ortho_dist(t, &phi)).transpose()?;
    Ok(EstimateReport {
        phi_hat: phi,
        error,
        final_cost: cost,
        outer_iterations: outer,
        inner_steps: inner,
        converged,
        tolerance_used: settings.tol,
        wall_time: elapsed(&timer),
        cost_history: history,
    })
}
