//! Finite-difference audit of the analytic St/Gr gradients.

use manifold_ar_core::arproc::{sample_system_parameter, simulate_ar1, ProcessSpec};
use manifold_ar_core::matcore::{sample_antisym, so_basis, OrthoMatrix};
use manifold_ar_core::rng::derive_seed;
use manifold_ar_core::sysid::CostContext;
use manifold_ar_core::RandomStream;
use serde::Serialize;

use crate::error::{Context, HarnessError, Result};
use crate::format::Family;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckConfig {
    pub manifold: Family,
    pub n: usize,
    pub k: usize,
    pub steps: usize,
    pub sigma: f64,
    pub configs: usize,
    pub seed: u64,
    /// Central-difference step.
    pub h: f64,
    /// Largest accepted relative error.
    pub tol: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            manifold: Family::Stiefel,
            n: 6,
            k: 2,
            steps: 5,
            sigma: 0.05,
            configs: 20,
            seed: 0,
            h: 1e-5,
            tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GradCase {
    pub seed: u64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradAudit {
    pub manifold: Family,
    pub n: usize,
    pub k: usize,
    pub steps: usize,
    pub h: f64,
    pub tol: f64,
    pub worst: f64,
    pub passed: bool,
    pub cases: Vec<GradCase>,
}

/// Compare the assembled gradient with central differences of the cost
/// along each basis direction, `(f(Φe^{hE}) − f(Φe^{−hE}))/2h`, at
/// random points near the true parameter of random trajectories.
pub fn check_grad(cfg: &GradCheckConfig) -> Result<GradAudit> {
    if cfg.manifold == Family::Orthogonal {
        return Err(HarnessError::config("gradient audit applies to stiefel and grassmann"));
    }
    if cfg.configs == 0 || cfg.steps == 0 || cfg.n < 2 {
        return Err(HarnessError::config("need n >= 2, steps >= 1 and at least one configuration"));
    }
    if !(cfg.h > 0.0 && cfg.tol > 0.0 && cfg.sigma >= 0.0) {
        return Err(HarnessError::config("h and tol must be positive and sigma nonnegative"));
    }
    let kind = cfg.manifold.kind(cfg.n, cfg.k).context("gradient audit")?;
    let basis = so_basis(cfg.n).context("gradient audit")?;
    let mut cases = Vec::with_capacity(cfg.configs);
    for c in 0..cfg.configs {
        let seed = derive_seed(cfg.seed, &[cfg.manifold.tag(), c as u64]);
        let mut rng = RandomStream::from_seed(seed);
        let truth = sample_system_parameter(cfg.n, 0.3, &mut rng).context("gradient audit")?;
        let spec = ProcessSpec::new(kind, truth.clone(), cfg.sigma, cfg.steps, rng.next_u64());
        let traj = simulate_ar1(&spec).context("gradient audit")?;
        let ctx = CostContext::new(&traj).context("gradient audit")?;
        let x = sample_antisym(cfg.n, 1.0, &mut rng);
        let phi = &truth * &OrthoMatrix::exp(&x.scale(0.2 / x.norm()));

        let grad = ctx.gradient_in_basis(&phi, &basis).context("gradient audit")?;
        let mut diff = 0.0;
        let mut reference = 0.0;
        for e in &basis {
            let at = |t: f64| ctx.cost(&(&phi * &OrthoMatrix::exp(&e.scale(t)))).context("gradient audit");
            let fd = (at(cfg.h)? - at(-cfg.h)?) / (2.0 * cfg.h);
            let analytic = grad.inner(e);
            diff += (analytic - fd).powi(2);
            reference += fd * fd;
        }
        cases.push(GradCase {
            seed,
            relative_error: (diff / reference.max(f64::MIN_POSITIVE)).sqrt(),
        });
    }
    let worst = cases.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    Ok(GradAudit {
        manifold: cfg.manifold,
        n: cfg.n,
        k: cfg.k,
        steps: cfg.steps,
        h: cfg.h,
        tol: cfg.tol,
        worst,
        passed: worst <= cfg.tol,
        cases,
    })
}
