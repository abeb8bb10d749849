use crate::manifolds::ManifoldPoint;
use crate::matcore::{
    chart_inverse, check_finite, expm, identity_nk, orthonormality_residual, AntisymMatrix, ORTHO_TOL,
};
use crate::{Error, Mat, Result};

/// Point of `St(n,k)`: an `n×k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint {
    y: Mat,
}

impl StiefelPoint {
    pub fn new(y: Mat) -> Result<Self> {
        let (n, k) = y.shape();
        if k == 0 || k > n {
            return Err(Error::InvalidDimension("Stiefel point needs 1 <= k <= n"));
        }
        check_finite(&y)?;
        let residual = orthonormality_residual(&y);
        if residual > ORTHO_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self { y })
    }

    /// `I_{n,k}`.
    pub fn canonical(n: usize, k: usize) -> Result<Self> {
        Self::new(identity_nk(n, k))
    }

    pub(crate) fn from_matrix_unchecked(y: Mat) -> Self {
        Self { y }
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn k(&self) -> usize {
        self.y.ncols()
    }

    pub fn as_matrix(&self) -> &Mat {
        &self.y
    }

    pub fn into_matrix(self) -> Mat {
        self.y
    }

    /// Orthogonal projection of an `n×k` matrix onto the tangent space at
    /// this point: `V − Y·sym(YᵀV)`.
    pub fn project_tangent(&self, v: &Mat) -> Mat {
        let ytv = self.y.tr_mul(v);
        v - &self.y * ((&ytv + ytv.transpose()) * 0.5)
    }
}

/// Tangent vector `D ∈ T_Y St(n,k)`, i.e. `YᵀD` antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelTangent {
    base: StiefelPoint,
    d: Mat,
}

impl StiefelTangent {
    pub fn new(base: StiefelPoint, d: Mat) -> Result<Self> {
        if d.shape() != base.y.shape() {
            return Err(Error::shape(base.y.shape(), d.shape()));
        }
        check_finite(&d)?;
        let ytd = base.y.tr_mul(&d);
        let residual = (&ytd + ytd.transpose()).norm();
        if residual > 1e-10 * d.norm().max(1.0) {
            return Err(Error::InvalidTangent { residual });
        }
        Ok(Self { base, d })
    }

    pub fn zero(base: StiefelPoint) -> Self {
        let d = Mat::zeros(base.n(), base.k());
        Self { base, d }
    }

    pub(crate) fn from_parts_unchecked(base: StiefelPoint, d: Mat) -> Self {
        Self { base, d }
    }

    pub fn base(&self) -> &StiefelPoint {
        &self.base
    }

    pub fn as_matrix(&self) -> &Mat {
        &self.d
    }

    pub fn into_matrix(self) -> Mat {
        self.d
    }

    /// Norm in the canonical metric, `sqrt(½ tr(Dᵀ(I − ½YYᵀ)D))`.
    pub fn canonical_norm(&self) -> f64 {
        libm::sqrt(canonical_sq_norm(&self.base.y, &self.d).max(0.0))
    }
}

/// `½ tr(Lᵀ(I_n − ½XXᵀ)L)` without forming the `n×n` matrix.
fn canonical_sq_norm(x: &Mat, l: &Mat) -> f64 {
    let xtl = x.tr_mul(l);
    0.5 * (l.norm_squared() - 0.5 * xtl.norm_squared())
}

/// Horizontal lift of a tangent `D` at `X` to 𝔬(n):
/// `Ω = DXᵀ − XDᵀ − X(XᵀD)Xᵀ`, so that `ΩX = D`. At `X = I_{n,k}` with
/// `D = [A; B]` this is the block matrix `[[A, −Bᵀ], [B, 0]]`.
pub fn horizontal_lift(x: &StiefelPoint, d: &Mat) -> AntisymMatrix {
    let xm = &x.y;
    let dxt = d * xm.transpose();
    let a = xm.tr_mul(d);
    let omega = &dxt - dxt.transpose() - xm * a * xm.transpose();
    AntisymMatrix::from_matrix_unchecked((&omega - omega.transpose()) * 0.5)
}

/// Canonical-metric geodesic `exp_X(D) = expm(Ω)·X` with `Ω` the
/// horizontal lift of `D`.
pub fn stiefel_exp(x: &StiefelPoint, d: &StiefelTangent) -> Result<StiefelPoint> {
    if d.base.y.shape() != x.y.shape() {
        return Err(Error::shape(x.y.shape(), d.base.y.shape()));
    }
    let mismatch = (&d.base.y - &x.y).amax();
    if mismatch > 1e-12 {
        return Err(Error::InvalidTangent { residual: mismatch });
    }
    let omega = horizontal_lift(x, &d.d);
    let q = expm(omega.as_matrix())?;
    Ok(StiefelPoint::from_matrix_unchecked(q * &x.y))
}

/// Second-order rational approximation `2(Y − X)(I_k + XᵀY)⁻¹` of the
/// Stiefel logarithm, as a raw `n×k` matrix.
///
/// Fails with [`Error::OutOfChart`] when `I_k + XᵀY` has condition number
/// at least `1e8`.
pub fn pade_log(x: &Mat, y: &Mat) -> Result<Mat> {
    if x.shape() != y.shape() {
        return Err(Error::shape(x.shape(), y.shape()));
    }
    let k = x.ncols();
    let m = Mat::identity(k, k) + x.tr_mul(y);
    let inv = chart_inverse(&m)?;
    Ok((y - x) * inv * 2.0)
}

/// Approximate logarithm `log_X(Y)` on `St(n,k)`.
///
/// The rational approximation has a second-order component along
/// `X·sym(·)`, normal to the manifold; it is removed here, which leaves a
/// tangent vector that agrees with the exact logarithm to third order.
pub fn stiefel_log_approx(x: &StiefelPoint, y: &StiefelPoint) -> Result<StiefelTangent> {
    let l = pade_log(&x.y, &y.y)?;
    let d = x.project_tangent(&l);
    Ok(StiefelTangent::from_parts_unchecked(x.clone(), d))
}

/// Approximate canonical distance `sqrt(½ tr(Lᵀ(I_n − ½XXᵀ)L))` with
/// `L = 2(Y − X)(I_k + XᵀY)⁻¹`, clamped at zero before the square root.
pub fn stiefel_dist_approx(x: &StiefelPoint, y: &StiefelPoint) -> Result<f64> {
    let l = pade_log(&x.y, &y.y)?;
    Ok(libm::sqrt(canonical_sq_norm(&x.y, &l).max(0.0)))
}

impl ManifoldPoint for StiefelPoint {
    fn log(&self, other: &Self) -> Result<Mat> {
        Ok(stiefel_log_approx(self, other)?.d)
    }

    fn exp(&self, v: &Mat) -> Result<Self> {
        if v.shape() != self.y.shape() {
            return Err(Error::shape(self.y.shape(), v.shape()));
        }
        let d = StiefelTangent::from_parts_unchecked(self.clone(), self.project_tangent(v));
        stiefel_exp(self, &d)
    }

    fn dist(&self, other: &Self) -> Result<f64> {
        stiefel_dist_approx(self, other)
    }

    fn as_matrix(&self) -> &Mat {
        &self.y
    }

    fn from_action(m: Mat) -> Self {
        Self::from_matrix_unchecked(m)
    }
}
