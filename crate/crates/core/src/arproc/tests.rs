use super::*;
use crate::manifolds::ortho_dist;
use crate::testutil::{random_orthogonal, random_stiefel};

fn ortho(n: usize, rng: &mut RandomStream) -> OrthoMatrix {
    OrthoMatrix::new(random_orthogonal(n, rng)).unwrap()
}

fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v.sqrt())
}

/// OLS slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, _) = mean_and_std(x);
    let (my, _) = mean_and_std(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn manifold_kind_validates_dimensions() {
    assert!(ManifoldKind::stiefel(3, 0).is_err());
    assert!(ManifoldKind::grassmann(3, 4).is_err());
    assert!(ManifoldKind::orthogonal(0).is_err());
    let st = ManifoldKind::stiefel(5, 2).unwrap();
    assert_eq!(st.point_shape(), (5, 2));
    assert_eq!(st.to_string(), "St(5,2)");
    assert_eq!(ManifoldKind::orthogonal(4).unwrap().k(), 4);
}

#[test]
fn system_parameter_distance_is_the_drawn_magnitude() {
    let mut rng = RandomStream::from_seed(1);
    let scale = 0.01;
    let dists: Vec<f64> = (0..10_000)
        .map(|_| {
            let phi = sample_system_parameter(6, scale, &mut rng).unwrap();
            assert!(phi.determinant() > 0.0);
            ortho_dist(&phi, &OrthoMatrix::identity(6)).unwrap()
        })
        .collect();
    let (_, std) = mean_and_std(&dists);
    let expected = scale * (1.0 - 2.0 / core::f64::consts::PI).sqrt();
    assert!((std / expected - 1.0).abs() < 0.05, "std {std} vs {expected}");
}

#[test]
fn system_parameter_magnitude_matches_half_normal_draw() {
    // replay the stream to recover s
    let mut a = RandomStream::from_seed(2);
    let mut b = a.clone();
    let phi = sample_system_parameter(5, 0.3, &mut a).unwrap();
    let _ = sample_antisym(5, 1.0, &mut b);
    let s = b.normal(0.3).abs();
    let d = ortho_dist(&phi, &OrthoMatrix::identity(5)).unwrap();
    assert!((d - s).abs() < 1e-13);
}

#[test]
fn system_parameter_tends_to_identity() {
    let mut rng = RandomStream::from_seed(3);
    let phi = sample_system_parameter(4, 1e-14, &mut rng).unwrap();
    assert!((phi.as_matrix() - Mat::identity(4, 4)).amax() < 1e-12);
    assert!(sample_system_parameter(4, 0.0, &mut rng).is_err());
}

#[test]
fn noise_free_trajectory_is_powers_of_phi() {
    let mut rng = RandomStream::from_seed(4);
    for kind in [
        ManifoldKind::orthogonal(5).unwrap(),
        ManifoldKind::stiefel(5, 2).unwrap(),
        ManifoldKind::grassmann(5, 3).unwrap(),
    ] {
        let phi = sample_system_parameter(5, 0.5, &mut rng).unwrap();
        let traj = simulate_ar1(&ProcessSpec::new(kind, phi.clone(), 0.0, 100, 7)).unwrap();
        let mut expected = kind.canonical_point();
        for (j, z) in traj.points().iter().enumerate() {
            let tol = if j == 2 { 1e-12 } else { 1e-10 };
            assert!((z - &expected).amax() <= tol, "{kind} step {j}");
            expected = phi.as_matrix() * expected;
        }
    }
}

#[test]
fn identity_noise_free_trajectory_is_constant() {
    let kind = ManifoldKind::stiefel(4, 2).unwrap();
    let traj = simulate_ar1(&ProcessSpec::new(kind, OrthoMatrix::identity(4), 0.0, 10, 0)).unwrap();
    for z in traj.points() {
        assert_eq!(z, &traj.points()[0]);
    }
}

#[test]
fn simulation_is_deterministic() {
    let mut rng = RandomStream::from_seed(5);
    let phi = sample_system_parameter(6, 0.1, &mut rng).unwrap();
    let spec = ProcessSpec::new(ManifoldKind::grassmann(6, 2).unwrap(), phi, 0.05, 50, 99);
    let a = simulate_ar1(&spec).unwrap();
    let b = simulate_ar1(&spec).unwrap();
    assert_eq!(a, b);
    let mut other = spec.clone();
    other.seed = 100;
    assert_ne!(simulate_ar1(&other).unwrap(), a);
}

#[test]
fn simulation_matches_the_recursion() {
    let mut rng = RandomStream::from_seed(6);
    let phi = sample_system_parameter(4, 0.2, &mut rng).unwrap();
    let spec = ProcessSpec::new(ManifoldKind::orthogonal(4).unwrap(), phi.clone(), 0.1, 3, 11);
    let traj = simulate_ar1(&spec).unwrap();
    let mut noise = RandomStream::from_seed(11);
    let mut z = Mat::identity(4, 4);
    for j in 1..=3 {
        let eps = sample_antisym(4, 0.1, &mut noise);
        z = expm(eps.as_matrix()).unwrap() * phi.as_matrix() * z;
        assert!((&z - &traj.points()[j]).amax() < 1e-14);
    }
    assert_eq!(traj.phi_true(), Some(&phi));
    assert_eq!(traj.sigma(), 0.1);
    assert_eq!(traj.seed(), 11);
}

#[test]
fn long_trajectories_stay_orthonormal() {
    let mut rng = RandomStream::from_seed(7);
    let phi = sample_system_parameter(5, 0.1, &mut rng).unwrap();
    let spec = ProcessSpec::new(ManifoldKind::stiefel(5, 3).unwrap(), phi, 0.1, 2500, 3);
    let traj = simulate_ar1(&spec).unwrap();
    assert!(traj
        .points()
        .iter()
        .all(|z| orthonormality_residual(z) < 1e-12));
}

#[test]
fn invalid_specs_are_rejected() {
    let kind = ManifoldKind::stiefel(4, 2).unwrap();
    let mut spec = ProcessSpec::new(kind, OrthoMatrix::identity(4), 0.1, 5, 0);
    spec.steps = 0;
    assert!(simulate_ar1(&spec).is_err());
    spec.steps = 5;
    spec.sigma = -1.0;
    assert!(simulate_ar1(&spec).is_err());
    spec.sigma = 0.1;
    spec.phi = OrthoMatrix::identity(3);
    assert!(simulate_ar1(&spec).is_err());
    spec.phi = OrthoMatrix::identity(4);
    spec.start = Mat::from_element(4, 2, 1.0);
    assert!(matches!(simulate_ar1(&spec), Err(Error::NotOrthonormal { .. })));
}

#[test]
fn trajectory_validation_and_accessors() {
    let kind = ManifoldKind::stiefel(3, 1).unwrap();
    let p = kind.canonical_point();
    assert_eq!(
        Trajectory::new(kind, alloc::vec![p.clone()], 0.0, None, 0),
        Err(Error::TrajectoryTooShort)
    );
    assert!(Trajectory::new(kind, alloc::vec![p.clone(), Mat::identity(3, 2)], 0.0, None, 0).is_err());
    let t = Trajectory::new(kind, alloc::vec![p.clone(), p], 0.0, None, 0).unwrap();
    assert_eq!(t.steps(), 1);
    assert!(t.stiefel_points().is_ok());
    assert!(matches!(t.orthogonal_points(), Err(Error::WrongManifold { .. })));
    assert!(matches!(t.grassmann_points(), Err(Error::WrongManifold { .. })));
}

#[test]
fn karcher_of_identical_points_takes_one_iteration() {
    let mut rng = RandomStream::from_seed(8);
    let p = ortho(5, &mut rng);
    let res = karcher_mean_points(&[p.clone(), p.clone(), p.clone()], KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
    assert!(res.converged);
    assert_eq!(res.iterations, 1);
    assert_eq!(res.point, p);

    let s = StiefelPoint::new(random_stiefel(5, 2, &mut rng)).unwrap();
    let res = karcher_mean_points(&[s.clone(), s.clone()], KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
    assert_eq!((res.iterations, res.point), (1, s));
}

#[test]
fn karcher_of_symmetric_pair_is_the_midpoint() {
    let mut rng = RandomStream::from_seed(9);
    let p = ortho(6, &mut rng);
    let x = sample_antisym(6, 1.0, &mut rng);
    let x = x.scale(0.2 / x.norm());
    let a = &OrthoMatrix::exp(&x) * &p;
    let b = &OrthoMatrix::exp(&-&x) * &p;
    let res = karcher_mean_points(&[a, b], KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
    assert!(res.converged);
    assert!(ortho_dist(&res.point, &p).unwrap() < 1e-9);
}

#[test]
fn karcher_returns_stationary_point() {
    let mut rng = RandomStream::from_seed(10);
    let p = ortho(5, &mut rng);
    let pts: Vec<OrthoMatrix> = (0..30)
        .map(|_| &OrthoMatrix::exp(&sample_antisym(5, 0.2, &mut rng)) * &p)
        .collect();
    let res = karcher_mean_points(&pts, KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
    assert!(res.converged);
    let mut v = Mat::zeros(5, 5);
    for q in &pts {
        v += res.point.log(q).unwrap();
    }
    assert!((v / 30.0).norm() < KARCHER_TOL);

    let base = StiefelPoint::new(random_stiefel(6, 2, &mut rng)).unwrap();
    let spts: Vec<StiefelPoint> = (0..30)
        .map(|_| apply_group(&OrthoMatrix::exp(&sample_antisym(6, 0.05, &mut rng)), &base).unwrap())
        .collect();
    let res = karcher_mean_points(&spts, KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
    assert!(res.converged && res.residual < KARCHER_TOL);

    let gbase = GrassmannPoint::new(random_stiefel(6, 3, &mut rng)).unwrap();
    let gpts: Vec<GrassmannPoint> = (0..30)
        .map(|_| apply_group(&OrthoMatrix::exp(&sample_antisym(6, 0.05, &mut rng)), &gbase).unwrap())
        .collect();
    let res = karcher_mean_points(&gpts, KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
    assert!(res.converged && res.residual < KARCHER_TOL);
}

#[test]
fn karcher_reports_non_convergence() {
    let mut rng = RandomStream::from_seed(11);
    let pts: Vec<OrthoMatrix> = (0..10)
        .map(|_| OrthoMatrix::exp(&sample_antisym(4, 0.3, &mut rng)))
        .collect();
    let res = karcher_mean_points(&pts, KARCHER_TOL, 1).unwrap();
    assert!(!res.converged);
    assert!(res.residual >= KARCHER_TOL);
    assert!(matches!(res.into_result(), Err(Error::NotConverged { .. })));
    let empty: [OrthoMatrix; 0] = [];
    assert!(karcher_mean_points(&empty, KARCHER_TOL, 10).is_err());
}

#[test]
fn karcher_is_left_equivariant_on_orthogonal_group() {
    let mut rng = RandomStream::from_seed(12);
    for _ in 0..10 {
        let p = ortho(5, &mut rng);
        let pts: Vec<OrthoMatrix> = (0..20)
            .map(|_| &OrthoMatrix::exp(&sample_antisym(5, 0.2, &mut rng)) * &p)
            .collect();
        let phi = ortho(5, &mut rng);
        let moved: Vec<OrthoMatrix> = pts.iter().map(|q| &phi * q).collect();
        let a = karcher_mean_points(&pts, KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
        let b = karcher_mean_points(&moved, KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert!(((&phi * &a.point).as_matrix() - b.point.as_matrix()).amax() < 1e-8);
    }
}

#[test]
fn karcher_of_noisy_cloud_approaches_centre() {
    let mut rng = RandomStream::from_seed(13);
    let p = ortho(10, &mut rng);
    let draw = |m: usize, rng: &mut RandomStream| -> f64 {
        let pts: Vec<OrthoMatrix> = (0..m)
            .map(|_| &OrthoMatrix::exp(&sample_antisym(10, 0.1, rng)) * &p)
            .collect();
        let mean = karcher_mean_points(&pts, KARCHER_TOL, KARCHER_MAX_ITER).unwrap();
        ortho_dist(&mean.into_result().unwrap(), &p).unwrap()
    };
    let big = draw(2000, &mut rng);
    assert!(big < 0.02, "{big}");
    let small: f64 = (0..5).map(|_| draw(100, &mut rng)).sum::<f64>() / 5.0;
    assert!(small > big);
}

#[test]
fn empirical_mean_check_is_exact_without_noise() {
    let mut rng = RandomStream::from_seed(14);
    let phi = sample_system_parameter(5, 0.3, &mut rng).unwrap();
    let z0 = ortho(5, &mut rng);
    assert!(empirical_mean_check(&phi, &z0, 0.0, 10, &mut rng).unwrap() <= 1e-10);
    let s = StiefelPoint::new(random_stiefel(5, 2, &mut rng)).unwrap();
    assert!(empirical_mean_check(&phi, &s, 0.0, 10, &mut rng).unwrap() <= 1e-10);
    assert!(empirical_mean_check(&phi, &s, 0.1, 1, &mut rng).is_err());
}

#[test]
fn empirical_mean_check_shrinks_at_clt_rate() {
    let mut rng = RandomStream::from_seed(15);
    let phi = sample_system_parameter(8, 0.01, &mut rng).unwrap();
    let z0 = OrthoMatrix::identity(8);
    let reps = 20;
    let avg = |m: usize, rng: &mut RandomStream| -> f64 {
        (0..reps)
            .map(|_| empirical_mean_check(&phi, &z0, 0.1, m, rng).unwrap())
            .sum::<f64>()
            / reps as f64
    };
    let a = avg(200, &mut rng);
    let b = avg(400, &mut rng);
    let ratio = b / a;
    assert!((ratio - core::f64::consts::FRAC_1_SQRT_2).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn empirical_mean_check_slope_over_sample_sizes() {
    let mut rng = RandomStream::from_seed(16);
    let phi = sample_system_parameter(6, 0.01, &mut rng).unwrap();
    let z0 = OrthoMatrix::identity(6);
    let ms = [250.0, 1000.0, 4000.0];
    let logs: Vec<f64> = ms
        .iter()
        .map(|&m| {
            let d: f64 = (0..5)
                .map(|_| empirical_mean_check(&phi, &z0, 0.1, m as usize, &mut rng).unwrap())
                .sum::<f64>()
                / 5.0;
            d.ln()
        })
        .collect();
    let lx: Vec<f64> = ms.iter().map(|m: &f64| m.ln()).collect();
    let s = slope(&lx, &logs);
    assert!((-0.7..=-0.3).contains(&s), "slope {s}");
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn empirical_mean_check_does_not_depend_on_start_point() {
    let mut rng = RandomStream::from_seed(17);
    let phi = sample_system_parameter(5, 0.01, &mut rng).unwrap();
    let z1 = StiefelPoint::canonical(5, 2).unwrap();
    let z2 = StiefelPoint::new(random_stiefel(5, 2, &mut rng)).unwrap();
    let reps = 200;
    let sample = |z: &StiefelPoint, seed: u64| -> Vec<f64> {
        let mut r = RandomStream::from_seed(seed);
        (0..reps)
            .map(|_| empirical_mean_check(&phi, z, 0.1, 20, &mut r).unwrap())
            .collect()
    };
    let mut a = sample(&z1, 100);
    let mut b = sample(&z2, 200);
    let d = ks_statistic(&mut a, &mut b);
    let critical = 1.36 * (2.0 / reps as f64).sqrt();
    assert!(d < critical, "KS statistic {d} >= {critical}");
}
