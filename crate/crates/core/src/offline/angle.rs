//! Angle-greedy construction of the reduced dual cone.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{w_norm, AffineOperatorSet, DualVector};
use crate::linalg::dot;

use super::pod::{argmax, Selection};
use super::snapshots::SnapshotStore;

/// Multipliers with a W-norm at or below this are not candidates.
pub const ZERO_MULTIPLIER: f64 = 1e-12;

/// Angles at or below this count as "already in the span".
pub const SATURATION_ANGLE: f64 = 1e-10;

/// Angle between `lambda` and `span(basis)` in the W inner product.
///
/// The projection is obtained from the normal equations with the basis
/// W-Gram matrix. The result equals `arccos(‖Πλ‖_W / ‖λ‖_W)`; it is evaluated
/// as `atan2(‖λ − Πλ‖_W, ‖Πλ‖_W)`, which stays accurate for tiny angles.
pub fn angle_to_subspace(
    lambda: &DualVector,
    basis: &[DualVector],
    ops: &AffineOperatorSet,
) -> Result<f64> {
    if lambda.dim() != ops.dim() || basis.iter().any(|b| b.dim() != ops.dim()) {
        return Err(Error::InvalidArgument("angle dimension mismatch".into()));
    }
    let norm = w_norm(lambda, ops)?;
    if !(norm > ZERO_MULTIPLIER) {
        return Err(Error::DegenerateInput("angle of a zero multiplier".into()));
    }
    if basis.is_empty() {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    let k = basis.len();
    let riesz: Vec<Vec<f64>> = basis.iter().map(|b| ops.solve_x(&b.coeffs)).collect();
    let gram = DMatrix::from_fn(k, k, |i, j| dot(&basis[i].coeffs, &riesz[j]));
    let gram = 0.5 * (&gram + gram.transpose());
    let rhs = DVector::from_iterator(k, riesz.iter().map(|z| dot(z, &lambda.coeffs)));
    let coeffs = gram
        .cholesky()
        .ok_or_else(|| Error::IllConditionedBasis {
            condition: f64::INFINITY,
        })?
        .solve(&rhs);
    let mut projection = vec![0.0; ops.dim()];
    for (c, b) in coeffs.iter().zip(basis) {
        projection.iter_mut().zip(&b.coeffs).for_each(|(p, v)| *p += c * v);
    }
    let residual: Vec<f64> = lambda
        .coeffs
        .iter()
        .zip(&projection)
        .map(|(a, b)| a - b)
        .collect();
    let along = w_norm(&DualVector::new(projection), ops)?;
    let across = w_norm(&DualVector::new(residual), ops)?;
    Ok(across.atan2(along))
}

/// Nonnegative generators of the reduced cone `{Σ αⱼ ξⱼ : αⱼ ≥ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualConeBasis {
    /// W-normalized multiplier snapshots.
    pub generators: Vec<DualVector>,
    pub selected: Vec<Selection>,
}

impl DualConeBasis {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct AngleGreedyOutput {
    pub cone: DualConeBasis,
    /// `eps_lambda[k-1]` is the largest candidate angle to the span of the
    /// first `k` generators.
    pub eps_lambda: Vec<f64>,
    pub saturated_at: Option<usize>,
}

/// Angle-greedy with `budget` generators; saturation is an error.
pub fn angle_greedy(store: &SnapshotStore, budget: usize, ops: &AffineOperatorSet) -> Result<AngleGreedyOutput> {
    let out = angle_greedy_truncating(store, budget, ops)?;
    match out.saturated_at {
        Some(achieved) => Err(Error::ConeSaturation { achieved }),
        None => Ok(out),
    }
}

struct Candidate<'a> {
    selection: Selection,
    lambda: &'a [f64],
    riesz: Vec<f64>,
    norm: f64,
}

/// Like [`angle_greedy`] but returns the partial cone when snapshots run out.
pub fn angle_greedy_truncating(
    store: &SnapshotStore,
    budget: usize,
    ops: &AffineOperatorSet,
) -> Result<AngleGreedyOutput> {
    if budget == 0 {
        return Err(Error::InvalidArgument("angle-greedy budget must be >= 1".into()));
    }
    // scan order: parameter outer, time step inner
    let candidates: Vec<Candidate> = store
        .trajectories
        .iter()
        .enumerate()
        .flat_map(|(mu_index, t)| {
            t.lambda.iter().enumerate().map(move |(i, l)| (mu_index, i + 1, l))
        })
        .filter_map(|(mu_index, step, lambda)| {
            let riesz = ops.solve_x(lambda);
            let norm = dot(lambda, &riesz).max(0.0).sqrt();
            (norm > ZERO_MULTIPLIER).then_some(Candidate {
                selection: Selection {
                    mu_index,
                    step: Some(step),
                },
                lambda,
                riesz,
                norm,
            })
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::DegenerateInput(
            "no multiplier snapshot has positive W-norm".into(),
        ));
    }

    let mut cone = DualConeBasis {
        generators: Vec::new(),
        selected: Vec::new(),
    };
    let mut span = WOrthonormal::default();
    let mut eps_lambda = Vec::with_capacity(budget);
    let mut saturated_at = None;
    let mut pick = 0;
    loop {
        let chosen = &candidates[pick];
        let generator: Vec<f64> = chosen.lambda.iter().map(|v| v / chosen.norm).collect();
        span.push(&generator, ops);
        cone.generators.push(DualVector::new(generator));
        cone.selected.push(chosen.selection);

        let angles: Vec<f64> = candidates
            .par_iter()
            .map(|c| span.angle(c.lambda, &c.riesz))
            .collect();
        let (best, angle) = argmax(&angles);
        eps_lambda.push(angle);
        let k = cone.len();
        if k == budget {
            break;
        }
        if angle <= SATURATION_ANGLE {
            saturated_at = Some(k);
            break;
        }
        pick = best;
    }
    Ok(AngleGreedyOutput {
        cone,
        eps_lambda,
        saturated_at,
    })
}

/// W-orthonormal basis of the generator span, kept with Riesz images.
#[derive(Default)]
struct WOrthonormal {
    vectors: Vec<Vec<f64>>,
    riesz: Vec<Vec<f64>>,
}

impl WOrthonormal {
    fn push(&mut self, generator: &[f64], ops: &AffineOperatorSet) {
        let mut v = generator.to_vec();
        for _ in 0..2 {
            for (q, zq) in self.vectors.iter().zip(&self.riesz) {
                let c = dot(&v, zq);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let z = ops.solve_x(&v);
        let norm = dot(&v, &z).max(0.0).sqrt();
        if norm > 0.0 {
            self.vectors.push(v.iter().map(|a| a / norm).collect());
            self.riesz.push(z.iter().map(|a| a / norm).collect());
        }
    }

    fn angle(&self, lambda: &[f64], riesz: &[f64]) -> f64 {
        let mut r = lambda.to_vec();
        let mut rz = riesz.to_vec();
        let mut along_sq = 0.0;
        for (q, zq) in self.vectors.iter().zip(&self.riesz) {
            let c = dot(q, &rz);
            along_sq += c * c;
            r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            rz.iter_mut().zip(zq).for_each(|(a, b)| *a -= c * b);
        }
        let across = dot(&r, &rz).max(0.0).sqrt();
        across.atan2(along_sq.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{Mesh1D, ObstacleData, ParameterVector};
    use crate::truth::{SchemeConfig, Trajectory};

    fn setup(n: usize) -> (Mesh1D, AffineOperatorSet) {
        let mesh = Mesh1D::new(n, 300.0).unwrap();
        let ops = AffineOperatorSet::assemble(&mesh).unwrap();
        (mesh, ops)
    }

    fn store_with_multipliers(mesh: &Mesh1D, lambdas: Vec<Vec<f64>>) -> SnapshotStore {
        let n = mesh.interior();
        let config = SchemeConfig::new(1.0, lambdas.len(), 0.5).unwrap();
        let mu = ParameterVector::new(100.0, 0.05, 0.0015, 0.5).unwrap();
        let obstacle = ObstacleData::new(mesh, 100.0).unwrap();
        let traj = Trajectory {
            mu,
            config,
            u: vec![obstacle.psi_tilde.clone(); lambdas.len() + 1],
            lambda: lambdas,
            iterations: vec![1; config.steps],
        };
        let _ = n;
        SnapshotStore {
            params: vec![mu],
            trajectories: vec![traj],
            obstacles: vec![obstacle],
            mesh: mesh.clone(),
            config,
        }
    }

    #[test]
    fn empty_basis_gives_right_angle() {
        let (_, ops) = setup(10);
        let l = DualVector::new(vec![1.0; 10]);
        assert_eq!(angle_to_subspace(&l, &[], &ops).unwrap(), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn member_of_span_has_zero_angle() {
        let (_, ops) = setup(10);
        let a = DualVector::new((0..10).map(|i| i as f64).collect());
        let b = DualVector::new((0..10).map(|i| (i as f64).cos()).collect());
        let l = DualVector::new(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| 0.3 * x - 2.0 * y).collect());
        assert!(angle_to_subspace(&l, &[a, b], &ops).unwrap() <= 1e-7);
    }

    #[test]
    fn w_orthogonal_vector_has_right_angle() {
        let (_, ops) = setup(10);
        let a = DualVector::new((0..10).map(|i| 1.0 + i as f64).collect());
        // ⟨a, l⟩_W = a·X⁻¹l = 0 for l = X w with w ⟂ a (Euclidean)
        let mut w: Vec<f64> = (0..10).map(|i| (i as f64 * 1.3).sin()).collect();
        let c = dot(&w, &a.coeffs) / dot(&a.coeffs, &a.coeffs);
        w.iter_mut().zip(&a.coeffs).for_each(|(x, y)| *x -= c * y);
        let l = DualVector::new(ops.x.matvec(&w));
        let angle = angle_to_subspace(&l, &[a], &ops).unwrap();
        assert!((angle - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn zero_multiplier_rejected() {
        let (_, ops) = setup(10);
        let err = angle_to_subspace(&DualVector::new(vec![0.0; 10]), &[], &ops);
        assert!(matches!(err, Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn parallel_snapshots_saturate() {
        let (mesh, ops) = setup(12);
        let base: Vec<f64> = (0..12).map(|i| if i < 4 { 1.0 + i as f64 } else { 0.0 }).collect();
        let lambdas = vec![
            vec![0.0; 12],
            base.clone(),
            base.iter().map(|v| 3.0 * v).collect(),
            base.iter().map(|v| 0.5 * v).collect(),
        ];
        let store = store_with_multipliers(&mesh, lambdas);
        let one = angle_greedy(&store, 1, &ops).unwrap();
        assert_eq!(one.cone.selected[0], Selection { mu_index: 0, step: Some(2) });
        assert!((w_norm(&one.cone.generators[0], &ops).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            angle_greedy(&store, 2, &ops),
            Err(Error::ConeSaturation { achieved: 1 })
        ));
    }

    #[test]
    fn greedy_picks_largest_angle() {
        let (mesh, ops) = setup(6);
        let e = |i: usize| {
            let mut v = vec![0.0; 6];
            v[i] = 1.0;
            v
        };
        let mixed: Vec<f64> = e(0).iter().zip(e(1)).map(|(a, b)| a + 0.01 * b).collect();
        let store = store_with_multipliers(&mesh, vec![e(0), mixed, e(4)]);
        let out = angle_greedy(&store, 2, &ops).unwrap();
        // e(4) is far more W-orthogonal to e(0) than the perturbed e(0)
        assert_eq!(out.cone.selected[1].step, Some(3));
        assert!(out.eps_lambda[0] >= out.eps_lambda[1]);
    }
}
