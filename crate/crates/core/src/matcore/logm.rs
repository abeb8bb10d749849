//! Principal logarithm on SO(n).
//!
//! `C = (Q + Qᵀ)/2` and `S = (Q − Qᵀ)/2` commute, and on each eigenspace
//! of `C` (eigenvalue `cos θ`) the matrix `Q` acts as a rotation by `θ`.
//! The eigenvectors of `C` therefore give the real Schur (rotation block)
//! basis of `Q`, and the logarithm is `L = g(C)·S` with `g = θ / sin θ`.

use nalgebra::SymmetricEigen;

use crate::matcore::{AntisymMatrix, OrthoMatrix};
use crate::{Error, Mat, Result};

/// Rotation angles within this distance of π are rejected.
pub const BRANCH_MARGIN: f64 = 1e-6;

/// Principal logarithm of `Q ∈ SO(n)` with all rotation angles below
/// `π − 1e-6`.
pub fn logm_so(q: &OrthoMatrix) -> Result<AntisymMatrix> {
    let q = q.as_matrix();
    let n = q.nrows();
    if n == 1 {
        if q[(0, 0)] < 0.0 {
            return Err(Error::NotSpecialOrthogonal { det: q[(0, 0)] });
        }
        return Ok(AntisymMatrix::zeros(1));
    }
    let det = q.clone().determinant();
    if det < 0.0 {
        return Err(Error::NotSpecialOrthogonal { det });
    }

    let qt = q.transpose();
    let sym = (q + &qt) * 0.5;
    let skew = (q - &qt) * 0.5;
    // SᵀS = sin²θ on each eigenspace; computed from S directly it keeps
    // full relative accuracy for small angles.
    let sin_sq = skew.tr_mul(&skew);

    let eig = SymmetricEigen::new(sym);
    let v = &eig.eigenvectors;
    let mut weights = Mat::zeros(n, n);
    for i in 0..n {
        let vi = v.column(i);
        let cos = eig.eigenvalues[i];
        let sin = libm::sqrt((vi.transpose() * &sin_sq * vi)[(0, 0)].max(0.0));
        let theta = libm::atan2(sin, cos);
        if theta > core::f64::consts::PI - BRANCH_MARGIN {
            return Err(Error::BranchAmbiguity { angle: theta });
        }
        weights[(i, i)] = theta_over_sin(theta, sin);
    }
    let g = v * weights * v.transpose();
    let l = g * skew;
    Ok(AntisymMatrix::from_matrix_unchecked((&l - l.transpose()) * 0.5))
}

fn theta_over_sin(theta: f64, sin: f64) -> f64 {
    if theta < 1e-4 {
        let t2 = theta * theta;
        1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    } else {
        theta / sin
    }
}
