//! Block-diagonal (plane rotation) form of an antisymmetric matrix.

use alloc::vec::Vec;

use nalgebra::Schur;

use super::AntisymMatrix;
use crate::Mat;

/// Residual bound, relative to `‖Δ‖_F`, for accepting the factorization.
const ACCEPT_RESIDUAL: f64 = 1e-13;

/// `Δ = Q·J·Qᵀ` with `Q` orthogonal and `J` block diagonal, each block
/// `[[0, θ], [−θ, 0]]` acting on a pair of adjacent coordinates. Then
/// `expm(tΔ) = Q·expm(tJ)·Qᵀ`, and `expm(tJ)` is a set of plane rotations.
#[derive(Debug, Clone)]
pub struct PlanarForm {
    q: Mat,
    /// `(i, θ)`: rotation of coordinates `i, i+1` at rate `θ`.
    planes: Vec<(usize, f64)>,
}

impl PlanarForm {
    /// `None` when the real Schur iteration fails or its result does not
    /// reproduce `Δ` to rounding; callers then fall back to [`super::expm`].
    pub fn new(delta: &AntisymMatrix) -> Option<Self> {
        let d = delta.as_matrix();
        let n = d.nrows();
        let scale = d.norm();
        if scale == 0.0 {
            return Some(Self {
                q: Mat::identity(n, n),
                planes: Vec::new(),
            });
        }
        let (q, t) = Schur::try_new(d.clone(), f64::EPSILON, 100 * n.max(10))?.unpack();
        let mut planes = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && t[(i + 1, i)].abs() > f64::EPSILON * scale {
                planes.push((i, 0.5 * (t[(i, i + 1)] - t[(i + 1, i)])));
                i += 2;
            } else {
                i += 1;
            }
        }
        let form = Self { q, planes };
        let mut j = Mat::zeros(n, n);
        for &(i, theta) in &form.planes {
            j[(i, i + 1)] = theta;
            j[(i + 1, i)] = -theta;
        }
        let rebuilt = &form.q * j * form.q.transpose();
        let ortho = (form.q.tr_mul(&form.q) - Mat::identity(n, n)).norm();
        if (rebuilt - d).norm() > ACCEPT_RESIDUAL * scale || ortho > ACCEPT_RESIDUAL {
            return None;
        }
        Some(form)
    }

    pub fn basis(&self) -> &Mat {
        &self.q
    }

    /// Apply `expm(tJ)` to the rows of `m` in place.
    pub fn rotate_rows(&self, m: &mut Mat, t: f64) {
        for &(i, theta) in &self.planes {
            let (s, c) = libm::sincos(t * theta);
            for col in 0..m.ncols() {
                let (a, b) = (m[(i, col)], m[(i + 1, col)]);
                m[(i, col)] = c * a + s * b;
                m[(i + 1, col)] = c * b - s * a;
            }
        }
    }

    /// `expm(tΔ)`.
    pub fn exp(&self, t: f64) -> Mat {
        let mut r = self.q.transpose();
        self.rotate_rows(&mut r, t);
        &self.q * r
    }
}
