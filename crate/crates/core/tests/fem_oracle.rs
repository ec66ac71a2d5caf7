//! Assembled operators against an independent Simpson-rule oracle.
//!
//! Every integrand is a polynomial of degree at most two on each cell, so
//! cellwise Simpson integration with closed-form hat functions is exact.

use american_rb::*;

fn hat(nodes: &[f64], i: usize, s: f64) -> (f64, f64) {
    // interior index i maps to node i + 1
    let (a, b, c) = (nodes[i], nodes[i + 1], nodes[i + 2]);
    if s >= a && s <= b {
        ((s - a) / (b - a), 1.0 / (b - a))
    } else if s > b && s <= c {
        ((c - s) / (c - b), -1.0 / (c - b))
    } else {
        (0.0, 0.0)
    }
}

/// `∫ f(s, φ_i, φ_i', φ_j, φ_j')` over the whole domain by cellwise Simpson,
/// evaluating derivatives just inside each cell.
fn integrate(nodes: &[f64], i: usize, j: usize, f: impl Fn(f64, f64, f64, f64, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for cell in nodes.windows(2) {
        let (a, b) = (cell[0], cell[1]);
        let inside = |s: f64| s.clamp(a + 1e-12 * (b - a), b - 1e-12 * (b - a));
        let eval = |s: f64| {
            let (pi, _) = hat(nodes, i, s);
            let (pj, _) = hat(nodes, j, s);
            let (_, di) = hat(nodes, i, inside(s));
            let (_, dj) = hat(nodes, j, inside(s));
            f(s, pi, di, pj, dj)
        };
        total += (b - a) / 6.0 * (eval(a) + 4.0 * eval(0.5 * (a + b)) + eval(b));
    }
    total
}

fn check(mesh: &Mesh1D, ops: &AffineOperatorSet) {
    let nodes = mesh.nodes();
    let s_f = mesh.s_f();
    let n = mesh.interior();
    let x = ops.x.to_dense();
    let m = ops.mass.to_dense();
    let a1 = ops.a1.to_dense();
    let a2 = ops.a2.to_dense();
    let a3 = ops.a3.to_dense();
    let scale = x.amax();
    for i in 0..n {
        for j in 0..n {
            // row i tests with φ_i, column j is the trial function φ_j
            let xo = integrate(nodes, i, j, |s, pi, di, pj, dj| s * s * dj * di + pj * pi);
            let mo = integrate(nodes, i, j, |_, pi, _, pj, _| pj * pi);
            let a1o = integrate(nodes, i, j, |s, pi, di, _, dj| 0.5 * s * s * dj * di + s * dj * pi);
            let a2o = integrate(nodes, i, j, |s, pi, _, _, dj| -s * dj * pi);
            assert!((x[(i, j)] - xo).abs() <= 1e-13 * scale, "X[{i},{j}]");
            assert!((m[(i, j)] - mo).abs() <= 1e-13 * m.amax(), "Mass[{i},{j}]");
            assert!((a1[(i, j)] - a1o).abs() <= 1e-13 * a1.amax(), "A1[{i},{j}]");
            assert!((a2[(i, j)] - a2o).abs() <= 1e-13 * a2.amax(), "A2[{i},{j}]");
            assert_eq!(a3[(i, j)], m[(i, j)]);
        }
        let f1o = integrate(nodes, i, i, |s, pi, _, _, _| s / s_f * pi);
        let f2o = integrate(nodes, i, i, |_, pi, _, _, _| pi);
        assert!((ops.f1[i] - f1o).abs() <= 1e-13 * f1o.abs().max(1.0));
        assert!((ops.f2[i] - f2o).abs() <= 1e-13 * f2o.abs().max(1.0));
    }
}

#[test]
fn operators_match_simpson_oracle_on_tiny_meshes() {
    for (n, s_f) in [(2, 2.0), (3, 4.0), (4, 300.0), (7, 1.0)] {
        let mesh = Mesh1D::new(n, s_f).unwrap();
        check(&mesh, &AffineOperatorSet::assemble(&mesh).unwrap());
    }
}

#[test]
fn operators_match_simpson_oracle_on_default_mesh() {
    let mesh = Mesh1D::new(99, 300.0).unwrap();
    check(&mesh, &AffineOperatorSet::assemble(&mesh).unwrap());
}

#[test]
fn mass_closed_form() {
    let mesh = Mesh1D::new(5, 6.0).unwrap();
    let ops = AffineOperatorSet::assemble(&mesh).unwrap();
    let ds = mesh.delta_s();
    for i in 0..5 {
        approx::assert_relative_eq!(ops.mass.diag[i], 2.0 * ds / 3.0, max_relative = 1e-14);
    }
    for v in ops.mass.lower.iter().chain(&ops.mass.upper) {
        approx::assert_relative_eq!(*v, ds / 6.0, max_relative = 1e-14);
    }
}

#[test]
fn affine_combination() {
    let mesh = Mesh1D::new(9, 300.0).unwrap();
    let ops = AffineOperatorSet::assemble(&mesh).unwrap();
    let mu = ParameterVector::new(97.0, 0.04, 0.002, 0.45).unwrap();
    let a = ops.operator(&mu).to_dense();
    let expected = ops.a1.to_dense() * (mu.sigma * mu.sigma)
        + ops.a2.to_dense() * (mu.r - mu.q)
        + ops.a3.to_dense() * mu.r;
    assert!((a - expected).amax() < 1e-12);
    let f = ops.load(&mu);
    for i in 0..9 {
        let e = mu.k * mu.q * ops.f1[i] - mu.k * mu.r * ops.f2[i];
        assert!((f[i] - e).abs() < 1e-12);
    }
}
