//! Active-set solver against exhaustive enumeration.

mod common;

use american_rb::*;
use common::*;

#[test]
fn tridiagonal_instances_match_enumeration() {
    let mut rng = rng(11);
    for case in 0..150 {
        let n = 1 + case % 12;
        let t = random_tridiagonal(&mut rng, n);
        let rhs = random_vec(&mut rng, n, -1.0, 1.0);
        let psi = random_vec(&mut rng, n, -1.0, 1.0);
        let oracle = enumerate_lcp(&t.to_dense(), &rhs, &psi);
        assert_eq!(oracle.matches, 1);
        let problem = LcpProblem::new(SystemMatrix::Tridiagonal(t), rhs, psi).unwrap();
        let sol = solve_lcp(&problem).unwrap();
        assert_eq!(sol.active, oracle.active, "case {case}");
        assert!(max_abs_diff(&sol.u, &oracle.u) < 1e-12);
        assert!(max_abs_diff(&sol.lambda, &oracle.lambda) < 1e-12);
    }
}

#[test]
fn dense_p_matrix_instances_match_enumeration() {
    let mut rng = rng(12);
    for case in 0..50 {
        let n = 2 + case % 9;
        let m = random_p_matrix(&mut rng, n);
        let rhs = random_vec(&mut rng, n, -1.0, 1.0);
        let psi = random_vec(&mut rng, n, -1.0, 1.0);
        let oracle = enumerate_lcp(&m, &rhs, &psi);
        let problem = LcpProblem::new(SystemMatrix::Dense(m), rhs, psi).unwrap();
        let sol = solve_lcp(&problem).unwrap();
        assert_eq!(sol.active, oracle.active, "case {case}");
        assert!(max_abs_diff(&sol.u, &oracle.u) < 1e-12);
    }
}

#[test]
fn truth_step_matches_enumeration_on_small_mesh() {
    let mesh = Mesh1D::new(10, 300.0).unwrap();
    let ops = AffineOperatorSet::assemble(&mesh).unwrap();
    let config = SchemeConfig::default();
    let mu = mu0();
    let obstacle = ObstacleData::new(&mesh, mu.k).unwrap();
    let stepper = american_rb::truth::ThetaStepper::new(&mu, &ops, &obstacle, &config).unwrap();
    let s = stepper.implicit_matrix().to_dense();
    let mut u = obstacle.psi_tilde.clone();
    for _ in 0..config.steps {
        let rhs = stepper.problem(&u).unwrap().rhs().to_vec();
        let oracle = enumerate_lcp(&s, &rhs, &obstacle.psi_tilde);
        let step = theta_step(&u, &mu, &ops, &obstacle, &config).unwrap();
        let scale = 1.0 + u.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        assert_eq!(step.active, oracle.active);
        assert!(max_abs_diff(&step.u, &oracle.u) < 1e-12 * scale);
        let lambda_scale = 1.0 + s.amax() * scale + rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        assert!(max_abs_diff(&step.lambda, &oracle.lambda) < 1e-12 * lambda_scale);
        u = step.u;
    }
}
