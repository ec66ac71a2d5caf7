//! W-norm, supremizer and angle computations against dense oracles.

mod common;

use american_rb::offline::angle_to_subspace;
use american_rb::*;
use common::*;
use nalgebra::{DMatrix, DVector};

#[test]
fn sampled_supremum_never_exceeds_w_norm_and_attains_it() {
    let (_, ops, _) = default_setup();
    let x = dense_x(&ops);
    let mut rng = rng(31);
    for _ in 0..5 {
        let eta = DualVector::new(random_vec(&mut rng, 99, -1.0, 1.0));
        let norm = w_norm(&eta, &ops).unwrap();
        let mut best = 0.0_f64;
        for _ in 0..2000 {
            let v = random_vec(&mut rng, 99, -1.0, 1.0);
            let ratio = eta.action(&v) / ops.v_norm(&v);
            assert!(ratio <= norm * (1.0 + 1e-12));
            best = best.max(ratio);
        }
        assert!(best < norm);
        let maximizer = x.clone().lu().solve(&DVector::from_column_slice(&eta.coeffs)).unwrap();
        let attained = eta.action(maximizer.as_slice()) / ops.v_norm(maximizer.as_slice());
        assert!(((attained - norm) / norm).abs() < 1e-10);
    }
}

#[test]
fn supremizer_is_an_isometry() {
    let (_, ops, _) = default_setup();
    let x = dense_x(&ops);
    let mut rng = rng(32);
    for _ in 0..100 {
        let xi = DualVector::new(random_vec(&mut rng, 99, 0.0, 1.0));
        let b = riesz_supremizer(&xi, &ops).unwrap();
        let norm = w_norm(&xi, &ops).unwrap();
        assert!(((ops.v_norm(&b) - norm) / norm).abs() < 1e-10);
        let back = &x * DVector::from_column_slice(&b);
        assert!(max_abs_diff(back.as_slice(), &xi.coeffs) < 1e-10 * xi.coeffs.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
    }
}

/// Angle through a whitening transform `η ↦ L⁻¹η` and Euclidean QR.
fn qr_angle(x: &DMatrix<f64>, lambda: &[f64], basis: &[Vec<f64>]) -> f64 {
    let l = x.clone().cholesky().unwrap().l();
    let white = |v: &[f64]| l.solve_lower_triangular(&DVector::from_column_slice(v)).unwrap();
    let y = white(lambda);
    let cols: Vec<DVector<f64>> = basis.iter().map(|b| white(b)).collect();
    let q = DMatrix::from_columns(&cols).qr().q();
    let along = &q * (q.transpose() * &y);
    let across = &y - &along;
    across.norm().atan2(along.norm())
}

#[test]
fn angles_match_whitened_qr() {
    let (_, ops, _) = default_setup();
    let x = dense_x(&ops);
    let mut rng = rng(33);
    for k in 1..8 {
        let basis: Vec<Vec<f64>> = (0..k).map(|_| random_vec(&mut rng, 99, 0.0, 1.0)).collect();
        let cone: Vec<DualVector> = basis.iter().cloned().map(DualVector::new).collect();
        let lambda = random_vec(&mut rng, 99, 0.0, 1.0);
        let got = angle_to_subspace(&DualVector::new(lambda.clone()), &cone, &ops).unwrap();
        let expected = qr_angle(&x, &lambda, &basis);
        assert!((got - expected).abs() < 1e-10, "k = {k}: {got} vs {expected}");
        // a member of the span has zero angle
        let member: Vec<f64> = (0..99).map(|i| basis.iter().map(|b| b[i]).sum()).collect();
        assert!(angle_to_subspace(&DualVector::new(member), &cone, &ops).unwrap() < 1e-7);
    }
}
