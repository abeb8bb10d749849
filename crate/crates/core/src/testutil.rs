//! Helpers shared by unit tests.

use crate::matcore::reorthonormalize;
use crate::{Mat, RandomStream};

/// Haar-ish random orthogonal matrix (QR of a Gaussian matrix).
pub fn random_orthogonal(n: usize, rng: &mut RandomStream) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.standard_normal());
    reorthonormalize(&g)
}

/// Random `n×k` matrix with orthonormal columns.
pub fn random_stiefel(n: usize, k: usize, rng: &mut RandomStream) -> Mat {
    random_orthogonal(n, rng).columns(0, k).into_owned()
}

/// `X = P·B·Pᵀ` where `B` holds 2×2 blocks `θ_i·[[0,−1],[1,0]]`, together
/// with the closed-form `exp(X) = P·blockdiag(R(θ_i), I)·Pᵀ`.
pub fn block_rotation_generator(p: &Mat, angles: &[f64]) -> (Mat, Mat) {
    let n = p.nrows();
    assert!(2 * angles.len() <= n);
    let mut b = Mat::zeros(n, n);
    let mut r = Mat::identity(n, n);
    for (i, &t) in angles.iter().enumerate() {
        let (a, c) = (2 * i, 2 * i + 1);
        b[(a, c)] = -t;
        b[(c, a)] = t;
        r[(a, a)] = t.cos();
        r[(a, c)] = -t.sin();
        r[(c, a)] = t.sin();
        r[(c, c)] = t.cos();
    }
    (p * b * p.transpose(), p * r * p.transpose())
}
