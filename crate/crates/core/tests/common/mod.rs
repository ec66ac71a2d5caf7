//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use american_rb::linalg::Tridiagonal;
use american_rb::offline::{
    build_reduced_model, generate_snapshots, sample_training_set, Budget, SaturationPolicy,
};
use american_rb::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn default_setup() -> (Mesh1D, AffineOperatorSet, SchemeConfig) {
    let mesh = Mesh1D::new(99, 300.0).unwrap();
    let ops = AffineOperatorSet::assemble(&mesh).unwrap();
    (mesh, ops, SchemeConfig::default())
}

pub fn mu0() -> ParameterVector {
    ParameterVector::new(100.0, 0.05, 0.0015, 0.5).unwrap()
}

/// Training store and model for the default configuration, seed 42.
pub fn default_model(nv_tilde: usize, nw: usize) -> (SnapshotStore, ReducedModel) {
    let (mesh, ops, config) = default_setup();
    let train = sample_training_set(&ParameterBox::default(), 16, 42);
    let store = generate_snapshots(&train, &mesh, &ops, &config).unwrap();
    let model = build_reduced_model(&store, &ops, Budget { nv_tilde, nw }, SaturationPolicy::Fail)
        .unwrap()
        .model;
    (store, model)
}

pub fn dense_x(ops: &AffineOperatorSet) -> DMatrix<f64> {
    ops.x.to_dense()
}

/// Strictly diagonally dominant tridiagonal matrix with positive diagonal.
pub fn random_tridiagonal(rng: &mut ChaCha8Rng, n: usize) -> Tridiagonal {
    let lower: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let upper: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let diag = (0..n)
        .map(|i| {
            let off = i.checked_sub(1).map_or(0.0, |j| lower[j].abs())
                + upper.get(i).map_or(0.0, |v: &f64| v.abs());
            off + rng.gen_range(0.1..2.0)
        })
        .collect();
    Tridiagonal { lower, diag, upper }
}

/// Dense P-matrix `D + A` with `A` skew plus a positive definite part.
pub fn random_p_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let skew = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let skew = &skew - skew.transpose();
    &g * g.transpose() + skew + DMatrix::identity(n, n) * 0.5
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub struct Enumerated {
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    pub active: Vec<bool>,
    /// Number of active sets that satisfy every sign condition.
    pub matches: usize,
}

/// Solves `S u − λ = rhs`, `u ≥ ψ`, `λ ≥ 0`, `λᵀ(u − ψ) = 0` by trying all
/// `2ⁿ` active sets.
pub fn enumerate_lcp(s: &DMatrix<f64>, rhs: &[f64], psi: &[f64]) -> Enumerated {
    let n = rhs.len();
    assert!(n <= 16);
    let mut found: Option<Enumerated> = None;
    let mut matches = 0;
    for mask in 0u32..(1 << n) {
        let active: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let mut u: Vec<f64> = psi.to_vec();
        if !free.is_empty() {
            let sff = DMatrix::from_fn(free.len(), free.len(), |a, b| s[(free[a], free[b])]);
            let b = DVector::from_iterator(
                free.len(),
                free.iter().map(|&i| {
                    rhs[i] - (0..n).filter(|&j| active[j]).map(|j| s[(i, j)] * psi[j]).sum::<f64>()
                }),
            );
            let Some(x) = sff.lu().solve(&b) else { continue };
            for (k, &i) in free.iter().enumerate() {
                u[i] = x[k];
            }
        }
        let su = s * DVector::from_column_slice(&u);
        let lambda: Vec<f64> = (0..n)
            .map(|i| if active[i] { su[i] - rhs[i] } else { 0.0 })
            .collect();
        let ok = (0..n).all(|i| if active[i] { lambda[i] >= 0.0 } else { u[i] >= psi[i] });
        if ok {
            matches += 1;
            if found.is_none() {
                found = Some(Enumerated {
                    u,
                    lambda,
                    active,
                    matches: 0,
                });
            }
        }
    }
    let mut e = found.expect("no active set satisfies the sign conditions");
    e.matches = matches;
    e
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `σ_max(Lᵀ S)²` and the mode `L⁻ᵀ u₁` with `X = L Lᵀ`.
pub fn dense_pod(x: &DMatrix<f64>, snapshots: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = x.nrows();
    let l = x.clone().cholesky().unwrap().l();
    let s = DMatrix::from_fn(n, snapshots.len(), |i, j| snapshots[j][i]);
    let svd = (l.transpose() * s).svd(true, false);
    let (top, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    let u1 = svd.u.unwrap().column(top).into_owned();
    let mode = l.transpose().solve_upper_triangular(&u1).unwrap();
    (sigma * sigma, mode.as_slice().to_vec())
}
