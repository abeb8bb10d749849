//! Dense matrix kernels and Lie-algebra utilities.

mod expm;
mod logm;
mod planar;

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::{Error, Mat, RandomStream, Result};

pub use expm::expm;
pub use logm::logm_so;
pub use planar::PlanarForm;

/// Tolerance on `‖QᵀQ − I‖_F` for orthogonal / orthonormal-column matrices.
pub const ORTHO_TOL: f64 = 1e-10;

/// Largest condition number accepted when inverting `I_k + XᵀY`.
pub const MAX_CHART_CONDITION: f64 = 1e8;

/// Element of the Lie algebra 𝔬(n): a real antisymmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymMatrix(Mat);

impl AntisymMatrix {
    /// Validates antisymmetry to `1e-12 · max|entries|` and a zero diagonal.
    pub fn new(m: Mat) -> Result<Self> {
        check_square(&m)?;
        check_finite(&m)?;
        let scale = m.amax();
        let n = m.nrows();
        let mut residual = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                residual = residual.max((m[(i, j)] + m[(j, i)]).abs());
            }
        }
        if residual > 1e-12 * scale {
            return Err(Error::NotAntisymmetric { residual });
        }
        Ok(Self(m))
    }

    pub fn zeros(n: usize) -> Self {
        Self(Mat::zeros(n, n))
    }

    /// Wraps a matrix already known to be antisymmetric.
    pub(crate) fn from_matrix_unchecked(m: Mat) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Frobenius inner product with another element of 𝔬(n).
    pub fn inner(&self, other: &AntisymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * s)
    }
}

impl Add for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn add(self, rhs: &AntisymMatrix) -> AntisymMatrix {
        AntisymMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn sub(self, rhs: &AntisymMatrix) -> AntisymMatrix {
        AntisymMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn neg(self) -> AntisymMatrix {
        AntisymMatrix(-&self.0)
    }
}

impl Mul<f64> for &AntisymMatrix {
    type Output = AntisymMatrix;
    fn mul(self, rhs: f64) -> AntisymMatrix {
        self.scale(rhs)
    }
}

/// Element of the orthogonal group O(n).
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoMatrix(Mat);

impl OrthoMatrix {
    /// Validates `‖QᵀQ − I‖_F ≤ 1e-10`.
    pub fn new(m: Mat) -> Result<Self> {
        check_square(&m)?;
        check_finite(&m)?;
        let residual = orthonormality_residual(&m);
        if residual > ORTHO_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub(crate) fn from_matrix_unchecked(m: Mat) -> Self {
        Self(m)
    }

    /// `expm(X)` for `X ∈ 𝔬(n)`.
    pub fn exp(x: &AntisymMatrix) -> Self {
        // antisymmetric input is finite and square by construction
        Self(expm(x.as_matrix()).expect("finite antisymmetric input"))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    /// Inverse, which on O(n) is the transpose.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn determinant(&self) -> f64 {
        self.0.clone().determinant()
    }

    /// Project back onto O(n) (QR with positive diagonal); used to control
    /// drift after long product chains.
    pub fn reorthonormalized(&self) -> Self {
        Self(reorthonormalize(&self.0))
    }
}

impl Mul for &OrthoMatrix {
    type Output = OrthoMatrix;
    fn mul(self, rhs: &OrthoMatrix) -> OrthoMatrix {
        OrthoMatrix(&self.0 * &rhs.0)
    }
}

pub(crate) fn check_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn check_square(m: &Mat) -> Result<()> {
    if m.nrows() == 0 {
        return Err(Error::InvalidDimension("matrix must be at least 1x1"));
    }
    if m.nrows() != m.ncols() {
        return Err(Error::shape((m.nrows(), m.nrows()), m.shape()));
    }
    Ok(())
}

/// `‖MᵀM − I‖_F` for an `n×k` matrix.
pub fn orthonormality_residual(m: &Mat) -> f64 {
    let k = m.ncols();
    (m.tr_mul(m) - Mat::identity(k, k)).norm()
}

/// `I_{n,k}`: the first `k` columns of the identity.
pub fn identity_nk(n: usize, k: usize) -> Mat {
    Mat::identity(n, k)
}

/// Thin QR re-orthonormalization with the diagonal of `R` made positive,
/// so a matrix that is already orthonormal is (nearly) left unchanged.
pub fn reorthonormalize(m: &Mat) -> Mat {
    let qr = m.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// 1-norm (maximum absolute column sum).
pub(crate) fn one_norm(m: &Mat) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of a small chart matrix such as `I_k + XᵀY`, rejecting
/// matrices whose 1-norm condition number reaches [`MAX_CHART_CONDITION`].
pub(crate) fn chart_inverse(m: &Mat) -> Result<Mat> {
    let k = m.nrows();
    let mut work = alloc::vec![0.0; k * k];
    let mut inv = Mat::zeros(k, k);
    chart_inverse_into(m.as_slice(), k, &mut work, inv.as_mut_slice())?;
    Ok(inv)
}

/// [`chart_inverse`] on column-major slices, with caller-provided scratch.
pub(crate) fn chart_inverse_into(m: &[f64], k: usize, work: &mut [f64], inv: &mut [f64]) -> Result<()> {
    work.copy_from_slice(m);
    inv.fill(0.0);
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    let condition = if gauss_jordan(work, inv, k) {
        slice_one_norm(m, k) * slice_one_norm(inv, k)
    } else {
        f64::INFINITY
    };
    if !condition.is_finite() || condition >= MAX_CHART_CONDITION {
        return Err(Error::OutOfChart { step: None, condition });
    }
    Ok(())
}

fn slice_one_norm(m: &[f64], k: usize) -> f64 {
    m.chunks_exact(k)
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss–Jordan elimination with partial pivoting on column-major `k×k`
/// data: reduces `a` to the identity while applying the same row
/// operations to `b`. False on an exactly singular pivot.
fn gauss_jordan(a: &mut [f64], b: &mut [f64], k: usize) -> bool {
    let at = |r: usize, c: usize| c * k + r;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[at(x, col)].abs().total_cmp(&a[at(y, col)].abs()))
            .unwrap_or(col);
        if a[at(pivot, col)] == 0.0 {
            return false;
        }
        if pivot != col {
            for c in 0..k {
                a.swap(at(pivot, c), at(col, c));
                b.swap(at(pivot, c), at(col, c));
            }
        }
        let d = 1.0 / a[at(col, col)];
        for c in 0..k {
            a[at(col, c)] *= d;
            b[at(col, c)] *= d;
        }
        for r in 0..k {
            let f = a[at(r, col)];
            if r == col || f == 0.0 {
                continue;
            }
            for c in 0..k {
                a[at(r, c)] -= f * a[at(col, c)];
                b[at(r, c)] -= f * b[at(col, c)];
            }
        }
    }
    true
}

/// `(M − Mᵀ)/2`.
pub fn antisym_project(m: &Mat) -> Result<AntisymMatrix> {
    check_square(m)?;
    check_finite(m)?;
    Ok(AntisymMatrix((m - m.transpose()) * 0.5))
}

/// Zero the lower-right `(n−k)×(n−k)` block, keeping the `k×k` block and
/// the off-diagonal blocks.
pub fn horizontal_project(x: &AntisymMatrix, k: usize) -> Result<AntisymMatrix> {
    let n = x.dim();
    if k == 0 || k >= n {
        return Err(Error::InvalidDimension("horizontal projection needs 0 < k < n"));
    }
    let mut m = x.0.clone();
    m.view_mut((k, k), (n - k, n - k)).fill(0.0);
    Ok(AntisymMatrix(m))
}

/// Frobenius inner product `tr(XᵀY)`.
pub fn frobenius(x: &Mat, y: &Mat) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(Error::shape(x.shape(), y.shape()));
    }
    Ok(x.dot(y))
}

/// Orthonormal basis `(E_ij − E_ji)/√2`, `i < j`, in lexicographic order.
pub fn so_basis(n: usize) -> Result<Vec<AntisymMatrix>> {
    if n < 2 {
        return Err(Error::InvalidDimension("so(n) basis needs n >= 2"));
    }
    let c = core::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let mut m = Mat::zeros(n, n);
            m[(i, j)] = c;
            m[(j, i)] = -c;
            basis.push(AntisymMatrix(m));
        }
    }
    Ok(basis)
}

/// Remove from `new` its Frobenius projections onto each element of
/// `previous` (modified Gram–Schmidt). `previous` must be pairwise
/// orthogonal and nonzero.
///
/// Returns `None` when the residual collapses below `1e-12 · ‖new‖`; the
/// caller is expected to restart with a fresh direction.
pub fn gram_schmidt(new: &AntisymMatrix, previous: &[AntisymMatrix]) -> Option<AntisymMatrix> {
    let norm = new.norm();
    if norm == 0.0 {
        return None;
    }
    let mut r = new.0.clone();
    for p in previous {
        let pp = p.0.dot(&p.0);
        if pp > 0.0 {
            let c = r.dot(&p.0) / pp;
            r -= &p.0 * c;
        }
    }
    if r.norm() < 1e-12 * norm {
        None
    } else {
        Some(AntisymMatrix(r))
    }
}

/// Antisymmetric projection of an `n×n` matrix with i.i.d. `N(0, σ²)`
/// entries. Always consumes `n²` normal draws, whatever `sigma` is.
pub fn sample_antisym(n: usize, sigma: f64, rng: &mut RandomStream) -> AntisymMatrix {
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = rng.normal(sigma);
        }
    }
    AntisymMatrix((&g - g.transpose()) * 0.5)
}

#[cfg(test)]
mod tests;
