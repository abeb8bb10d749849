//! AR(1) trajectories `Z_j = expm(ε_j)·Φ·Z_{j−1}` on O(n), St(n,k) and
//! Gr(n,k), and Karcher means of point clouds.

use alloc::vec::Vec;
use core::fmt;

use crate::manifolds::{apply_group, GrassmannPoint, ManifoldPoint, StiefelPoint};
use crate::matcore::{
    check_finite, expm, orthonormality_residual, reorthonormalize, sample_antisym, OrthoMatrix,
    ORTHO_TOL,
};
use crate::{Error, Mat, RandomStream, Result};

/// Trajectories are re-orthonormalized this often to stop drift.
pub const REPAIR_PERIOD: usize = 1000;

/// Which manifold a trajectory lives on, with its dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Orthogonal { n: usize },
    Stiefel { n: usize, k: usize },
    Grassmann { n: usize, k: usize },
}

impl ManifoldKind {
    pub fn orthogonal(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("n must be positive"));
        }
        Ok(Self::Orthogonal { n })
    }

    pub fn stiefel(n: usize, k: usize) -> Result<Self> {
        check_nk(n, k)?;
        Ok(Self::Stiefel { n, k })
    }

    pub fn grassmann(n: usize, k: usize) -> Result<Self> {
        check_nk(n, k)?;
        Ok(Self::Grassmann { n, k })
    }

    /// Ambient dimension; `Φ` is `n×n`.
    pub fn n(&self) -> usize {
        match *self {
            Self::Orthogonal { n } | Self::Stiefel { n, .. } | Self::Grassmann { n, .. } => n,
        }
    }

    /// Number of columns of a point (`n` on O(n)).
    pub fn k(&self) -> usize {
        match *self {
            Self::Orthogonal { n } => n,
            Self::Stiefel { k, .. } | Self::Grassmann { k, .. } => k,
        }
    }

    pub fn point_shape(&self) -> (usize, usize) {
        (self.n(), self.k())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Orthogonal { .. } => "orthogonal",
            Self::Stiefel { .. } => "stiefel",
            Self::Grassmann { .. } => "grassmann",
        }
    }

    /// Canonical start point: `I_n` on O(n), `I_{n,k}` otherwise.
    pub fn canonical_point(&self) -> Mat {
        Mat::identity(self.n(), self.k())
    }
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidDimension("need 0 < k <= n"));
    }
    Ok(())
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Orthogonal { n } => write!(f, "O({n})"),
            Self::Stiefel { n, k } => write!(f, "St({n},{k})"),
            Self::Grassmann { n, k } => write!(f, "Gr({n},{k})"),
        }
    }
}

fn check_point(kind: &ManifoldKind, m: &Mat) -> Result<()> {
    if m.shape() != kind.point_shape() {
        return Err(Error::shape(kind.point_shape(), m.shape()));
    }
    check_finite(m)?;
    let residual = orthonormality_residual(m);
    if residual > ORTHO_TOL {
        return Err(Error::NotOrthonormal { residual });
    }
    Ok(())
}

/// Observed sequence `Z_0, …, Z_N` together with how it was generated.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    kind: ManifoldKind,
    points: Vec<Mat>,
    sigma: f64,
    phi_true: Option<OrthoMatrix>,
    seed: u64,
}

impl Trajectory {
    pub fn new(
        kind: ManifoldKind,
        points: Vec<Mat>,
        sigma: f64,
        phi_true: Option<OrthoMatrix>,
        seed: u64,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TrajectoryTooShort);
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter("sigma must be finite and nonnegative"));
        }
        for p in &points {
            check_point(&kind, p)?;
        }
        if let Some(phi) = &phi_true {
            if phi.dim() != kind.n() {
                return Err(Error::shape((kind.n(), kind.n()), phi.as_matrix().shape()));
            }
        }
        Ok(Self {
            kind,
            points,
            sigma,
            phi_true,
            seed,
        })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn points(&self) -> &[Mat] {
        &self.points
    }

    /// Number of transitions `N` (one less than the number of points).
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn phi_true(&self) -> Option<&OrthoMatrix> {
        self.phi_true.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn orthogonal_points(&self) -> Result<Vec<OrthoMatrix>> {
        match self.kind {
            ManifoldKind::Orthogonal { .. } => Ok(self
                .points
                .iter()
                .cloned()
                .map(OrthoMatrix::from_matrix_unchecked)
                .collect()),
            other => Err(Error::WrongManifold {
                expected: "orthogonal",
                found: other,
            }),
        }
    }

    pub fn stiefel_points(&self) -> Result<Vec<StiefelPoint>> {
        match self.kind {
            ManifoldKind::Stiefel { .. } => Ok(self
                .points
                .iter()
                .cloned()
                .map(StiefelPoint::from_matrix_unchecked)
                .collect()),
            other => Err(Error::WrongManifold {
                expected: "stiefel",
                found: other,
            }),
        }
    }

    pub fn grassmann_points(&self) -> Result<Vec<GrassmannPoint>> {
        match self.kind {
            ManifoldKind::Grassmann { .. } => Ok(self
                .points
                .iter()
                .cloned()
                .map(GrassmannPoint::from_matrix_unchecked)
                .collect()),
            other => Err(Error::WrongManifold {
                expected: "grassmann",
                found: other,
            }),
        }
    }
}

/// Everything needed to simulate one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub kind: ManifoldKind,
    pub phi: OrthoMatrix,
    pub sigma: f64,
    pub steps: usize,
    pub start: Mat,
    pub seed: u64,
}

impl ProcessSpec {
    /// Spec starting at the canonical point of `kind`.
    pub fn new(kind: ManifoldKind, phi: OrthoMatrix, sigma: f64, steps: usize, seed: u64) -> Self {
        Self {
            start: kind.canonical_point(),
            kind,
            phi,
            sigma,
            steps,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be positive"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter("sigma must be finite and nonnegative"));
        }
        let n = self.kind.n();
        if self.phi.dim() != n {
            return Err(Error::shape((n, n), self.phi.as_matrix().shape()));
        }
        check_point(&self.kind, &self.start)
    }
}

/// Draw `Φ = expm(s·X/‖X‖_F)` with `X = sample_antisym(n, 1)` and
/// `s = |N(0, scale²)|`, so that `ortho_dist(Φ, I) = s`.
pub fn sample_system_parameter(n: usize, scale: f64, rng: &mut RandomStream) -> Result<OrthoMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be positive"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter("scale must be positive"));
    }
    let x = sample_antisym(n, 1.0, rng);
    let s = rng.normal(scale).abs();
    let norm = x.norm();
    if norm == 0.0 {
        return Ok(OrthoMatrix::identity(n));
    }
    Ok(OrthoMatrix::exp(&x.scale(s / norm)))
}

/// Simulate `Z_j = expm(ε_j)·Φ·Z_{j−1}` with `ε_j = sample_antisym(n, σ)`.
pub fn simulate_ar1(spec: &ProcessSpec) -> Result<Trajectory> {
    spec.validate()?;
    let n = spec.kind.n();
    let mut rng = RandomStream::from_seed(spec.seed);
    let phi = spec.phi.as_matrix();
    let mut points = Vec::with_capacity(spec.steps + 1);
    let mut z = spec.start.clone();
    points.push(z.clone());
    for j in 1..=spec.steps {
        let eps = sample_antisym(n, spec.sigma, &mut rng);
        z = expm(eps.as_matrix())? * (phi * &z);
        if j % REPAIR_PERIOD == 0 {
            z = reorthonormalize(&z);
        }
        points.push(z.clone());
    }
    Trajectory::new(
        spec.kind,
        points,
        spec.sigma,
        Some(spec.phi.clone()),
        spec.seed,
    )
}

/// Karcher iteration outcome. `converged` is false when `max_iter` was
/// reached; `point` is then the last iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct KarcherMean<P> {
    pub point: P,
    /// Norm of the mean logarithm at `point`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl<P> KarcherMean<P> {
    /// The mean, or [`Error::NotConverged`].
    pub fn into_result(self) -> Result<P> {
        if self.converged {
            Ok(self.point)
        } else {
            Err(Error::NotConverged {
                iterations: self.iterations,
                residual: self.residual,
            })
        }
    }
}

pub const KARCHER_TOL: f64 = 1e-10;
pub const KARCHER_MAX_ITER: usize = 200;

/// Fixed-point iteration `m ← exp_m(mean_i log_m(p_i))` started at the
/// first point.
pub fn karcher_mean_points<P: ManifoldPoint>(
    points: &[P],
    tol: f64,
    max_iter: usize,
) -> Result<KarcherMean<P>> {
    let first = points
        .first()
        .ok_or(Error::InvalidParameter("Karcher mean of an empty set"))?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidParameter("tol and max_iter must be positive"));
    }
    let shape = first.as_matrix().shape();
    if let Some(p) = points.iter().find(|p| p.as_matrix().shape() != shape) {
        return Err(Error::shape(shape, p.as_matrix().shape()));
    }
    let mut m = first.clone();
    let inv = 1.0 / points.len() as f64;
    let mut iterations = 0;
    loop {
        let mut v = m.log(&points[0])?;
        for p in &points[1..] {
            v += m.log(p)?;
        }
        v *= inv;
        let residual = v.norm();
        if !residual.is_finite() {
            return Err(Error::NonFinite);
        }
        iterations += 1;
        if residual < tol || iterations > max_iter {
            return Ok(KarcherMean {
                point: m,
                residual,
                iterations,
                converged: residual < tol,
            });
        }
        m = m.exp(&v)?;
    }
}

/// Distance between the Karcher mean of `M` one-step samples
/// `expm(ε_i)·Φ·z0` and `Φ·z0`.
pub fn empirical_mean_check<P: ManifoldPoint>(
    phi: &OrthoMatrix,
    z0: &P,
    sigma: f64,
    samples: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter("sigma must be finite and nonnegative"));
    }
    let target = apply_group(phi, z0)?;
    let n = phi.dim();
    let draws: Vec<P> = (0..samples)
        .map(|_| {
            let eps = OrthoMatrix::exp(&sample_antisym(n, sigma, rng));
            apply_group(&eps, &target)
        })
        .collect::<Result<_>>()?;
    let mean = karcher_mean_points(&draws, KARCHER_TOL, KARCHER_MAX_ITER)?.into_result()?;
    mean.dist(&target)
}

#[cfg(test)]
mod tests;
