//! Points, exponential and approximate logarithm maps, distances and the
//! left `O(n)` action on `O(n)`, `St(n,k)` and `Gr(n,k)`.

mod grassmann;
mod stiefel;

use crate::matcore::{expm, logm_so, OrthoMatrix};
use crate::{Error, Mat, Result};

pub use grassmann::{grassmann_dist_approx, grassmann_log_approx, procrustes_align, GrassmannPoint};
pub(crate) use grassmann::procrustes_rotation_from_overlap;
pub use stiefel::{
    horizontal_lift, pade_log, stiefel_dist_approx, stiefel_exp, stiefel_log_approx, StiefelPoint,
    StiefelTangent,
};

/// Geodesic distance `‖log(PᵀQ)‖_F` for the bi-invariant metric on O(n).
pub fn ortho_dist(p: &OrthoMatrix, q: &OrthoMatrix) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::shape(p.as_matrix().shape(), q.as_matrix().shape()));
    }
    let rel = OrthoMatrix::from_matrix_unchecked(p.as_matrix().tr_mul(q.as_matrix()));
    Ok(logm_so(&rel)?.norm())
}

/// Common interface of the three homogeneous spaces, as needed by the
/// simulator and the Karcher mean.
pub trait ManifoldPoint: Clone + Sized {
    /// Representation of `other` in the tangent space at `self`.
    fn log(&self, other: &Self) -> Result<Mat>;
    /// Follow the tangent `v` (same representation as [`Self::log`]).
    fn exp(&self, v: &Mat) -> Result<Self>;
    fn dist(&self, other: &Self) -> Result<f64>;
    fn as_matrix(&self) -> &Mat;
    /// Wrap a matrix produced by the left action of an orthogonal matrix
    /// on an existing point.
    fn from_action(m: Mat) -> Self;
}

impl ManifoldPoint for OrthoMatrix {
    /// Left-translated to the Lie algebra: `log(PᵀQ)`.
    fn log(&self, other: &Self) -> Result<Mat> {
        let rel = OrthoMatrix::from_matrix_unchecked(self.as_matrix().tr_mul(other.as_matrix()));
        Ok(logm_so(&rel)?.into_matrix())
    }

    fn exp(&self, v: &Mat) -> Result<Self> {
        Ok(OrthoMatrix::from_matrix_unchecked(self.as_matrix() * expm(v)?))
    }

    fn dist(&self, other: &Self) -> Result<f64> {
        ortho_dist(self, other)
    }

    fn as_matrix(&self) -> &Mat {
        OrthoMatrix::as_matrix(self)
    }

    fn from_action(m: Mat) -> Self {
        OrthoMatrix::from_matrix_unchecked(m)
    }
}

/// Left action `Φ·p`.
pub fn apply_group<P: ManifoldPoint>(phi: &OrthoMatrix, p: &P) -> Result<P> {
    let m = p.as_matrix();
    if phi.dim() != m.nrows() {
        return Err(Error::shape((m.nrows(), m.nrows()), phi.as_matrix().shape()));
    }
    Ok(P::from_action(phi.as_matrix() * m))
}
