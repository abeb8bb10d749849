use crate::manifolds::{pade_log, stiefel_exp, ManifoldPoint, StiefelPoint, StiefelTangent};
use crate::{Error, Mat, Result};

/// Principal angles this close to π/2 make the alignment ill-defined.
const RIGHT_ANGLE_MARGIN: f64 = 1e-6;

/// Cap on Newton iterations for the polar factor. With norm scaling the
/// iteration needs about ten steps at the chart margin.
const POLAR_MAX_ITER: usize = 60;

/// Point of `Gr(n,k)`, held as an orthonormal-column representative `Y`
/// of the class `[Y] = {Y·R : R ∈ O(k)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint(StiefelPoint);

impl GrassmannPoint {
    pub fn new(y: Mat) -> Result<Self> {
        StiefelPoint::new(y).map(Self)
    }

    pub fn canonical(n: usize, k: usize) -> Result<Self> {
        StiefelPoint::canonical(n, k).map(Self)
    }

    pub(crate) fn from_matrix_unchecked(y: Mat) -> Self {
        Self(StiefelPoint::from_matrix_unchecked(y))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn k(&self) -> usize {
        self.0.k()
    }

    pub fn as_matrix(&self) -> &Mat {
        self.0.as_matrix()
    }

    pub fn into_matrix(self) -> Mat {
        self.0.into_matrix()
    }

    pub fn representative(&self) -> &StiefelPoint {
        &self.0
    }

    /// Horizontal projection `(I − YYᵀ)V`.
    pub fn project_horizontal(&self, v: &Mat) -> Mat {
        let y = self.as_matrix();
        v - y * y.tr_mul(v)
    }
}

/// Procrustes alignment of `target` to `base`: returns `target·R` with
/// `R ∈ O(k)` chosen so that `baseᵀ·target·R` is symmetric positive
/// semidefinite (`R = VUᵀ` for `baseᵀ·target = USVᵀ`).
///
/// The singular values are the cosines of the principal angles; an angle
/// within `1e-6` of π/2 is an out-of-chart error.
pub fn procrustes_align(base: &Mat, target: &Mat) -> Result<Mat> {
    Ok(target * procrustes_rotation(base, target)?)
}

/// The rotation `R = VUᵀ` used by [`procrustes_align`].
pub(crate) fn procrustes_rotation(base: &Mat, target: &Mat) -> Result<Mat> {
    if base.shape() != target.shape() {
        return Err(Error::shape(base.shape(), target.shape()));
    }
    procrustes_rotation_from_overlap(base.tr_mul(target))
}

/// [`procrustes_rotation`] given `baseᵀ·target`.
///
/// `R` is the transpose of the orthogonal polar factor of the overlap,
/// computed by the scaled Newton iteration `X ← ½(γX + X⁻ᵀ/γ)`. The
/// iteration is accurate to rounding where the library SVD of small
/// nearly orthogonal matrices is only good to about `1e-11`.
pub(crate) fn procrustes_rotation_from_overlap(overlap: Mat) -> Result<Mat> {
    let out_of_chart = |condition: f64| Error::OutOfChart { step: None, condition };
    let mut x = overlap.clone();
    let mut polished = false;
    for _ in 0..POLAR_MAX_ITER {
        let inv_t = x.clone().try_inverse().ok_or(out_of_chart(f64::INFINITY))?.transpose();
        // norm scaling only pays off far from convergence
        let gamma = if polished { 1.0 } else { libm::sqrt(inv_t.norm() / x.norm()) };
        let next = (&x * gamma + inv_t / gamma) * 0.5;
        let change = (&next - &x).norm();
        x = next;
        if polished {
            break;
        }
        // quadratic convergence: one more step reaches rounding level
        polished = change < 1e-8;
    }
    if !polished {
        return Err(out_of_chart(f64::INFINITY));
    }
    // singular values of the overlap are the eigenvalues of XᵀO
    let h = x.tr_mul(&overlap);
    let smallest = ((&h + h.transpose()) * 0.5).symmetric_eigenvalues().min();
    if !(smallest >= libm::sin(RIGHT_ANGLE_MARGIN)) {
        return Err(out_of_chart(1.0 / smallest));
    }
    Ok(x.transpose())
}

/// Approximate logarithm on `Gr(n,k)` at `x`: the horizontal part of the
/// rational Stiefel approximation after aligning the representative of `y`.
pub fn grassmann_log_approx(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<StiefelTangent> {
    let aligned = procrustes_align(x.as_matrix(), y.as_matrix())?;
    let l = pade_log(x.as_matrix(), &aligned)?;
    Ok(StiefelTangent::from_parts_unchecked(
        x.0.clone(),
        x.project_horizontal(&l),
    ))
}

/// Approximate Grassmann distance `sqrt(tr(Lᵀ(I_n − XXᵀ)L))` with
/// `L = 2(Ỹ − X)(I_k + XᵀỸ)⁻¹` and `Ỹ` the aligned representative of `y`.
pub fn grassmann_dist_approx(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<f64> {
    let xm = x.as_matrix();
    let aligned = procrustes_align(xm, y.as_matrix())?;
    let l = pade_log(xm, &aligned)?;
    let sq = l.norm_squared() - xm.tr_mul(&l).norm_squared();
    Ok(libm::sqrt(sq.max(0.0)))
}

impl ManifoldPoint for GrassmannPoint {
    fn log(&self, other: &Self) -> Result<Mat> {
        Ok(grassmann_log_approx(self, other)?.into_matrix())
    }

    fn exp(&self, v: &Mat) -> Result<Self> {
        if v.shape() != self.as_matrix().shape() {
            return Err(Error::shape(self.as_matrix().shape(), v.shape()));
        }
        let d = StiefelTangent::from_parts_unchecked(self.0.clone(), self.project_horizontal(v));
        stiefel_exp(&self.0, &d).map(Self)
    }

    fn dist(&self, other: &Self) -> Result<f64> {
        grassmann_dist_approx(self, other)
    }

    fn as_matrix(&self) -> &Mat {
        GrassmannPoint::as_matrix(self)
    }

    fn from_action(m: Mat) -> Self {
        Self::from_matrix_unchecked(m)
    }
}
