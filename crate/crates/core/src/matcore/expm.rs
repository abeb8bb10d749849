//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 and 13.

use crate::matcore::{check_finite, check_square, one_norm};
use crate::{Mat, Result};

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which each degree meets unit roundoff in double precision.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.53939833006323e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential `Σ Xᵏ/k!`.
///
/// For antisymmetric input the result is orthogonal to machine precision.
pub fn expm(x: &Mat) -> Result<Mat> {
    check_square(x)?;
    check_finite(x)?;
    let norm = one_norm(x);
    if norm <= THETA3 {
        return Ok(pade_low(x, &B3));
    }
    if norm <= THETA5 {
        return Ok(pade_low(x, &B5));
    }
    if norm <= THETA7 {
        return Ok(pade_low(x, &B7));
    }
    if norm <= THETA9 {
        return Ok(pade_low(x, &B9));
    }
    let s = libm::ceil(libm::log2(norm / THETA13)).max(0.0) as i32;
    let scaled = x * libm::exp2(-f64::from(s));
    let mut r = pade13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &Mat, b: &[f64]) -> Mat {
    let n = a.nrows();
    let id = Mat::identity(n, n);
    let a2 = a * a;
    // even powers A^0, A^2, A^4, ...
    let mut powers = alloc::vec![id.clone(), a2.clone()];
    while 2 * powers.len() < b.len() {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u = Mat::zeros(n, n);
    let mut v = Mat::zeros(n, n);
    for (i, p) in powers.iter().enumerate() {
        if 2 * i + 1 < b.len() {
            u += p * b[2 * i + 1];
        }
        v += p * b[2 * i];
    }
    let u = a * u;
    solve_pade(u, v)
}

fn pade13(a: &Mat) -> Mat {
    let n = a.nrows();
    let b = &B13;
    let id = Mat::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u = a * (&a6 * inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1]);
    let inner_v = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = &a6 * inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];
    solve_pade(u, v)
}

/// `(V − U)⁻¹ (V + U)`.
fn solve_pade(u: Mat, v: Mat) -> Mat {
    let p = &v + &u;
    let q = v - u;
    // Q is well conditioned for the norms admitted by the theta bounds.
    q.lu().solve(&p).expect("Padé denominator is nonsingular")
}
