//! POD-greedy construction of the primal basis.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::AffineOperatorSet;
use crate::linalg::dot;

use super::snapshots::SnapshotStore;

/// V-norm below which a family of vectors is treated as zero.
const ZERO_NORM: f64 = 1e-12;

/// Greedy stops once the worst projection error falls to this fraction of the
/// largest snapshot norm; the remainder is rounding noise.
const EXHAUSTED_RELATIVE: f64 = 1e-11;

/// Dominant POD mode of `vectors` in the V inner product, with its captured
/// energy `Σ ⟨vⁿ, z⟩²_V`.
///
/// Uses the method of snapshots: the eigenproblem is posed on the small
/// snapshot Gram matrix and the eigenvector is lifted back to the mesh.
pub fn pod1_with_energy(vectors: &[Vec<f64>], ops: &AffineOperatorSet) -> Result<(Vec<f64>, f64)> {
    let n = ops.dim();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidArgument("POD input dimension mismatch".into()));
    }
    let applied: Vec<Vec<f64>> = vectors.iter().map(|v| ops.x.matvec(v)).collect();
    let m = vectors.len();
    let gram = DMatrix::from_fn(m, m, |i, j| dot(&vectors[i], &applied[j]));
    let gram = 0.5 * (&gram + gram.transpose());
    let largest = (0..m).map(|i| gram[(i, i)]).fold(0.0_f64, f64::max);
    if !(largest.sqrt() > ZERO_NORM) {
        return Err(Error::DegenerateInput(
            "all POD inputs have vanishing V-norm".into(),
        ));
    }
    let eig = gram.symmetric_eigen();
    let mut top = 0;
    for i in 1..m {
        if eig.eigenvalues[i] > eig.eigenvalues[top] {
            top = i;
        }
    }
    let weights = eig.eigenvectors.column(top);
    let mut z = vec![0.0; n];
    for (w, v) in weights.iter().zip(vectors) {
        for (zi, vi) in z.iter_mut().zip(v) {
            *zi += w * vi;
        }
    }
    let norm = ops.v_norm(&z);
    if !(norm > 0.0) {
        return Err(Error::DegenerateInput("POD mode has zero norm".into()));
    }
    z.iter_mut().for_each(|v| *v /= norm);
    fix_sign(&mut z);
    let xz = ops.x.matvec(&z);
    let energy = vectors.iter().map(|v| dot(v, &xz).powi(2)).sum();
    Ok((z, energy))
}

/// Dominant V-normalized POD mode of `vectors`.
pub fn pod1(vectors: &[Vec<f64>], ops: &AffineOperatorSet) -> Result<Vec<f64>> {
    pod1_with_energy(vectors, ops).map(|(z, _)| z)
}

/// Largest-magnitude entry (first on ties) made positive.
pub(crate) fn fix_sign(z: &mut [f64]) {
    let mut pivot = 0.0_f64;
    for &v in z.iter() {
        if v.abs() > pivot.abs() {
            pivot = v;
        }
    }
    if pivot < 0.0 {
        z.iter_mut().for_each(|v| *v = -*v);
    }
}

/// A greedy pick: training index and, for multipliers, the time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub mu_index: usize,
    pub step: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PodGreedyOutput {
    /// V-orthonormal basis vectors.
    pub vectors: Vec<Vec<f64>>,
    /// `eps_u[k-1]` is the worst training error against the first `k` vectors.
    pub eps_u: Vec<f64>,
    /// Parameter behind each basis vector.
    pub selections: Vec<Selection>,
    /// Basis size at which the snapshots ran out, if they did.
    pub saturated_at: Option<usize>,
}

/// Strong POD-greedy with `budget` vectors; saturation is an error.
pub fn pod_greedy(store: &SnapshotStore, budget: usize, ops: &AffineOperatorSet) -> Result<PodGreedyOutput> {
    let out = pod_greedy_truncating(store, budget, ops)?;
    match out.saturated_at {
        Some(achieved) => Err(Error::BasisSaturation { achieved }),
        None => Ok(out),
    }
}

/// Like [`pod_greedy`] but returns the partial basis when snapshots run out.
pub fn pod_greedy_truncating(
    store: &SnapshotStore,
    budget: usize,
    ops: &AffineOperatorSet,
) -> Result<PodGreedyOutput> {
    if budget == 0 {
        return Err(Error::InvalidArgument("POD-greedy budget must be >= 1".into()));
    }
    if store.is_empty() {
        return Err(Error::InvalidArgument("empty snapshot store".into()));
    }
    let scale = store
        .trajectories
        .iter()
        .flat_map(|t| t.u.iter())
        .map(|u| ops.v_norm(u))
        .fold(0.0_f64, f64::max);

    let first = &store.trajectories[0].u[0];
    let norm = ops.v_norm(first);
    if !(norm > ZERO_NORM) {
        return Err(Error::DegenerateInput(
            "initial snapshot of the first training parameter is zero".into(),
        ));
    }
    let mut basis = Basis::default();
    basis.push(first.iter().map(|v| v / norm).collect(), ops);
    let mut selections = vec![Selection {
        mu_index: 0,
        step: Some(0),
    }];
    let mut eps_u = Vec::with_capacity(budget);
    let mut saturated_at = None;

    loop {
        let errors: Vec<f64> = store
            .trajectories
            .par_iter()
            .map(|t| t.u.iter().map(|u| basis.residual_norm_sq(u, ops)).sum::<f64>())
            .collect();
        let (worst, functional) = argmax(&errors);
        eps_u.push(functional.max(0.0).sqrt());
        let k = basis.len();
        if k == budget {
            break;
        }
        if eps_u[k - 1] <= EXHAUSTED_RELATIVE * scale {
            saturated_at = Some(k);
            break;
        }
        let residuals: Vec<Vec<f64>> = store.trajectories[worst]
            .u
            .iter()
            .map(|u| basis.residual(u))
            .collect();
        let mode = match pod1(&residuals, ops) {
            Ok(z) => z,
            Err(Error::DegenerateInput(_)) => {
                saturated_at = Some(k);
                break;
            }
            Err(e) => return Err(e),
        };
        // two passes of modified Gram–Schmidt
        let mut v = basis.residual(&mode);
        v = basis.residual(&v);
        let norm = ops.v_norm(&v);
        if norm < ZERO_NORM {
            saturated_at = Some(k);
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v, ops);
        selections.push(Selection {
            mu_index: worst,
            step: None,
        });
    }
    Ok(PodGreedyOutput {
        vectors: basis.vectors,
        eps_u,
        selections,
        saturated_at,
    })
}

/// First index of the maximum.
pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// V-orthonormal vectors with their images under the Gram matrix.
#[derive(Default)]
struct Basis {
    vectors: Vec<Vec<f64>>,
    applied: Vec<Vec<f64>>,
}

impl Basis {
    fn len(&self) -> usize {
        self.vectors.len()
    }

    fn push(&mut self, v: Vec<f64>, ops: &AffineOperatorSet) {
        self.applied.push(ops.x.matvec(&v));
        self.vectors.push(v);
    }

    /// `u − Π u`, subtracting one direction at a time.
    fn residual(&self, u: &[f64]) -> Vec<f64> {
        let mut r = u.to_vec();
        for (b, xb) in self.vectors.iter().zip(&self.applied) {
            let c = dot(&r, xb);
            r.iter_mut().zip(b).for_each(|(ri, bi)| *ri -= c * bi);
        }
        r
    }

    fn residual_norm_sq(&self, u: &[f64], ops: &AffineOperatorSet) -> f64 {
        let r = self.residual(u);
        ops.v_inner(&r, &r).max(0.0)
    }
}
