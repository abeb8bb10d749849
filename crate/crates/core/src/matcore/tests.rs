use super::*;
use crate::testutil::{block_rotation_generator, random_orthogonal};
use proptest::prelude::*;

fn rot2(theta: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

fn gen2(theta: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0])
}

#[test]
fn expm_of_zero_is_identity() {
    assert_eq!(expm(&Mat::zeros(3, 3)).unwrap(), Mat::identity(3, 3));
}

#[test]
fn expm_planar_rotation() {
    let r = expm(&gen2(0.5)).unwrap();
    assert!((r - rot2(0.5)).amax() < 1e-15);
}

#[test]
fn expm_antisym_is_orthogonal() {
    let mut rng = RandomStream::from_seed(1);
    let x = sample_antisym(5, 1.0, &mut rng);
    let e = expm(x.as_matrix()).unwrap();
    assert!((&e * e.transpose() - Mat::identity(5, 5)).norm() < 1e-12);
}

#[test]
fn expm_matches_block_rotation_oracle() {
    // X = P·blockdiag(θ_i J)·Pᵀ has exp(X) = P·blockdiag(R(θ_i))·Pᵀ.
    let mut rng = RandomStream::from_seed(2);
    for &total in &[0.01, 0.5, 2.0, 5.0, 10.0] {
        let angles = [0.9 * total / 2f64.sqrt(), 0.3 * total / 2f64.sqrt(), 0.1 * total / 2f64.sqrt()];
        let p = random_orthogonal(7, &mut rng);
        let (x, expected) = block_rotation_generator(&p, &angles);
        let got = expm(&x).unwrap();
        let rel = (&got - &expected).norm() / expected.norm();
        assert!(rel < 1e-12, "norm {total}: relative error {rel:e}");
    }
}

#[test]
fn expm_matches_diagonalizable_oracle() {
    // Non-normal input: X = P·D·P⁻¹.
    let p = Mat::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.0, 1.0, 0.3, 0.2, 0.0, 1.0]);
    let pinv = p.clone().try_inverse().unwrap();
    for &scale in &[0.1, 1.0, 3.0] {
        let d = [scale, -0.5 * scale, 0.25 * scale];
        let x = &p * Mat::from_diagonal(&nalgebra::DVector::from_row_slice(&d)) * &pinv;
        let ed = nalgebra::DVector::from_iterator(3, d.iter().map(|v| v.exp()));
        let expected = &p * Mat::from_diagonal(&ed) * &pinv;
        let rel = (expm(&x).unwrap() - &expected).norm() / expected.norm();
        assert!(rel < 1e-12, "scale {scale}: relative error {rel:e}");
    }
}

#[test]
fn expm_rejects_non_finite() {
    let mut m = Mat::zeros(2, 2);
    m[(0, 1)] = f64::NAN;
    assert_eq!(expm(&m), Err(Error::NonFinite));
}

#[test]
fn logm_identity_is_zero() {
    let l = logm_so(&OrthoMatrix::identity(4)).unwrap();
    assert_eq!(l.as_matrix().amax(), 0.0);
}

#[test]
fn logm_planar_rotation() {
    let l = logm_so(&OrthoMatrix::new(rot2(0.3)).unwrap()).unwrap();
    assert!((l.as_matrix() - gen2(0.3)).amax() < 1e-15);
}

#[test]
fn logm_round_trip_unit_norm() {
    let mut rng = RandomStream::from_seed(3);
    let x = sample_antisym(6, 1.0, &mut rng);
    let x = x.scale(1.0 / x.norm());
    let q = OrthoMatrix::exp(&x);
    let l = logm_so(&q).unwrap();
    assert!((l.as_matrix() - x.as_matrix()).norm() < 1e-9);
}

#[test]
fn logm_round_trip_near_pi() {
    let mut rng = RandomStream::from_seed(4);
    let p = random_orthogonal(6, &mut rng);
    let angles = [core::f64::consts::PI - 0.011, 1.0, 1e-7];
    let (x, expected_exp) = block_rotation_generator(&p, &angles);
    let q = OrthoMatrix::new(expected_exp).unwrap();
    let l = logm_so(&q).unwrap();
    let err = (l.as_matrix() - &x).norm();
    assert!(err <= 1e-9 * x.norm().max(1.0), "error {err:e}");
}

#[test]
fn logm_rejects_reflections() {
    let mut m = Mat::identity(3, 3);
    m[(2, 2)] = -1.0;
    let q = OrthoMatrix::new(m).unwrap();
    assert!(matches!(logm_so(&q), Err(Error::NotSpecialOrthogonal { .. })));
}

#[test]
fn logm_rejects_angle_pi() {
    let q = OrthoMatrix::new(rot2(core::f64::consts::PI)).unwrap();
    assert!(matches!(logm_so(&q), Err(Error::BranchAmbiguity { .. })));
    let q = OrthoMatrix::new(rot2(core::f64::consts::PI - 1e-8)).unwrap();
    assert!(matches!(logm_so(&q), Err(Error::BranchAmbiguity { .. })));
}

#[test]
fn antisym_project_examples() {
    let s = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 5.0]);
    assert_eq!(antisym_project(&s).unwrap().as_matrix().amax(), 0.0);
    let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    let expected = Mat::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
    assert_eq!(antisym_project(&m).unwrap().as_matrix(), &expected);
    let x = antisym_project(&m).unwrap();
    assert_eq!(antisym_project(x.as_matrix()).unwrap(), x);
}

#[test]
fn horizontal_project_examples() {
    let mut rng = RandomStream::from_seed(5);
    let x = sample_antisym(5, 1.0, &mut rng);
    let h = horizontal_project(&x, 2).unwrap();
    // already horizontal
    assert_eq!(horizontal_project(&h, 2).unwrap(), h);
    // purely vertical: block-diag(0_k, C)
    let mut v = Mat::zeros(5, 5);
    v.view_mut((2, 2), (3, 3)).copy_from(&x.as_matrix().view((2, 2), (3, 3)));
    let v = AntisymMatrix::new(v).unwrap();
    assert_eq!(horizontal_project(&v, 2).unwrap().norm(), 0.0);
    assert_eq!(h.as_matrix().view((0, 0), (2, 5)), x.as_matrix().view((0, 0), (2, 5)));
    assert!(matches!(horizontal_project(&x, 5), Err(Error::InvalidDimension(_))));
}

#[test]
fn frobenius_examples() {
    let i3 = Mat::identity(3, 3);
    assert_eq!(frobenius(&i3, &i3).unwrap(), 3.0);
    let j = gen2(1.0);
    assert_eq!(frobenius(&j, &j).unwrap(), 2.0);
    let mut rng = RandomStream::from_seed(6);
    let a = Mat::from_fn(4, 4, |_, _| rng.standard_normal());
    let b = Mat::from_fn(4, 4, |_, _| rng.standard_normal());
    assert_eq!(frobenius(&a, &b).unwrap(), frobenius(&b, &a).unwrap());
    assert!(frobenius(&a, &Mat::zeros(3, 3)).is_err());
}

#[test]
fn so_basis_examples() {
    let b2 = so_basis(2).unwrap();
    assert_eq!(b2.len(), 1);
    let c = core::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(b2[0].as_matrix(), &Mat::from_row_slice(2, 2, &[0.0, c, -c, 0.0]));
    assert_eq!(so_basis(5).unwrap().len(), 10);
    assert!(so_basis(1).is_err());

    let b4 = so_basis(4).unwrap();
    for (i, a) in b4.iter().enumerate() {
        for (j, b) in b4.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((a.inner(b) - expected).abs() <= 1e-14);
        }
    }
}

#[test]
fn gram_schmidt_examples() {
    let mut rng = RandomStream::from_seed(7);
    let x = sample_antisym(4, 1.0, &mut rng);
    assert_eq!(gram_schmidt(&x, &[]).unwrap(), x);
    assert!(gram_schmidt(&x, &[x.scale(1.0 / x.norm())]).is_none());
    let b = so_basis(4).unwrap();
    let r = gram_schmidt(&(&b[0] + &b[1]), &b[..1]).unwrap();
    assert!((r.as_matrix() - b[1].as_matrix()).amax() < 1e-15);
}

#[test]
fn sample_antisym_zero_sigma() {
    let mut rng = RandomStream::from_seed(8);
    assert_eq!(sample_antisym(4, 0.0, &mut rng).norm(), 0.0);
}

#[test]
fn sample_antisym_is_deterministic() {
    let mut a = RandomStream::from_seed(9);
    let mut b = a.clone();
    assert_eq!(sample_antisym(5, 0.3, &mut a), sample_antisym(5, 0.3, &mut b));
}

#[test]
fn sample_antisym_entry_std() {
    // (g12 − g21)/2 has variance σ²/2
    let mut rng = RandomStream::from_seed(10);
    let draws = 100_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..draws {
        let x = sample_antisym(3, 1.0, &mut rng);
        let v = x.as_matrix()[(0, 1)];
        s1 += v;
        s2 += v * v;
    }
    let mean = s1 / draws as f64;
    let std = (s2 / draws as f64 - mean * mean).sqrt();
    let expected = 1.0 / 2f64.sqrt();
    assert!((std / expected - 1.0).abs() < 0.01, "std {std}");
}

#[test]
fn antisym_matrix_validation() {
    assert!(AntisymMatrix::new(Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).is_err());
    assert!(AntisymMatrix::new(gen2(2.0)).is_ok());
    assert!(OrthoMatrix::new(Mat::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0])).is_err());
}

#[test]
fn reorthonormalize_keeps_orthonormal_input() {
    let mut rng = RandomStream::from_seed(11);
    let q = random_orthogonal(5, &mut rng);
    let y = q.columns(0, 3).into_owned();
    assert!((reorthonormalize(&y) - &y).amax() < 1e-14);
    let noisy = &y + Mat::from_element(5, 3, 1e-9);
    assert!(orthonormality_residual(&reorthonormalize(&noisy)) < 1e-14);
}

#[test]
fn planar_form_of_degenerate_generators() {
    // repeated angles, a zero block and odd dimension
    let mut rng = RandomStream::from_seed(12);
    let p = random_orthogonal(7, &mut rng);
    for angles in [[0.4, 0.4, 0.0], [0.0, 0.0, 0.0], [1.0, -1.0, 2.5]] {
        let (x, _) = block_rotation_generator(&p, &angles);
        let x = AntisymMatrix::new(x).unwrap();
        let form = PlanarForm::new(&x).expect("antisymmetric input factors");
        for t in [-1.0, 0.3, 1.0] {
            let dense = expm(&(x.as_matrix() * t)).unwrap();
            assert!((form.exp(t) - dense).amax() < 1e-13);
        }
    }
    let zero = PlanarForm::new(&AntisymMatrix::zeros(4)).unwrap();
    assert_eq!(zero.exp(0.7), Mat::identity(4, 4));
}

#[test]
fn chart_inverse_matches_library_inverse() {
    let mut rng = RandomStream::from_seed(13);
    for k in 1..7 {
        let m = Mat::identity(k, k) + Mat::from_fn(k, k, |_, _| 0.5 * rng.standard_normal());
        let expected = m.clone().try_inverse().unwrap();
        let inv = chart_inverse(&m).unwrap();
        assert!((&inv - &expected).amax() <= 1e-12 * expected.amax().max(1.0));
    }
    let singular = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
    assert!(matches!(chart_inverse(&singular), Err(Error::OutOfChart { .. })));
    let near = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-9]);
    assert!(matches!(chart_inverse(&near), Err(Error::OutOfChart { .. })));
}

fn antisym_strategy(n: usize, scale: f64) -> impl Strategy<Value = AntisymMatrix> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        antisym_project(&(Mat::from_vec(n, n, v) * scale)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expm_of_antisym_is_orthogonal(x in antisym_strategy(6, 3.0)) {
        let q = expm(x.as_matrix()).unwrap();
        prop_assert!(orthonormality_residual(&q) < 1e-12);
    }

    #[test]
    fn planar_form_reproduces_expm(x in antisym_strategy(6, 1.0), t in -1.0f64..1.0) {
        let form = PlanarForm::new(&x).unwrap();
        let dense = expm(&(x.as_matrix() * t)).unwrap();
        prop_assert!((form.exp(t) - dense).amax() < 1e-13);
    }

    #[test]
    fn expm_inverse_is_expm_of_negation(x in antisym_strategy(5, 1.0)) {
        let x = x.scale(5.0f64.min(x.norm()) / x.norm().max(1e-300));
        let prod = expm(x.as_matrix()).unwrap() * expm(&-x.as_matrix()).unwrap();
        prop_assert!((prod - Mat::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn logm_inverts_expm(x in antisym_strategy(5, 1.0)) {
        // keep every rotation angle below π − 0.01
        let x = x.scale((core::f64::consts::PI - 0.01) / x.norm().max(1.0));
        let l = logm_so(&OrthoMatrix::exp(&x)).unwrap();
        prop_assert!((l.as_matrix() - x.as_matrix()).norm() <= 1e-9 * x.norm().max(1.0));
    }

    #[test]
    fn projections_are_linear_and_idempotent(
        a in prop::collection::vec(-1.0f64..1.0, 25),
        b in prop::collection::vec(-1.0f64..1.0, 25),
        s in -3.0f64..3.0,
    ) {
        let (a, b) = (Mat::from_vec(5, 5, a), Mat::from_vec(5, 5, b));
        let pa = antisym_project(&a).unwrap();
        let pb = antisym_project(&b).unwrap();
        let combo = antisym_project(&(&a * s + &b)).unwrap();
        prop_assert!((combo.as_matrix() - (pa.as_matrix() * s + pb.as_matrix())).amax() < 1e-14);
        prop_assert_eq!(antisym_project(pa.as_matrix()).unwrap(), pa.clone());

        let ha = horizontal_project(&pa, 2).unwrap();
        let hb = horizontal_project(&pb, 2).unwrap();
        let hc = horizontal_project(&combo, 2).unwrap();
        prop_assert!((hc.as_matrix() - (ha.as_matrix() * s + hb.as_matrix())).amax() < 1e-14);
        prop_assert_eq!(horizontal_project(&ha, 2).unwrap(), ha);
    }

    #[test]
    fn gram_schmidt_output_is_orthogonal(x in antisym_strategy(4, 1.0), y in antisym_strategy(4, 1.0), z in antisym_strategy(4, 1.0)) {
        let p0 = x;
        let Some(p1) = gram_schmidt(&y, core::slice::from_ref(&p0)) else { return Ok(()); };
        let history = [p0, p1];
        if let Some(r) = gram_schmidt(&z, &history) {
            for h in &history {
                prop_assert!(r.inner(h).abs() <= 1e-10 * r.norm() * h.norm());
            }
        }
    }
}
