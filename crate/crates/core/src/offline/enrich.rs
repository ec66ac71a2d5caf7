use nalgebra::DMatrix;

use crate::error::Result;
use crate::fem::{riesz_supremizer, AffineOperatorSet, GRAM_CONDITION_LIMIT};
use crate::linalg::{dot, symmetric_condition};

use super::angle::DualConeBasis;

/// POD block followed by the supremizers of the cone generators.
#[derive(Debug, Clone)]
pub struct PrimalBasis {
    pub pod_vectors: Vec<Vec<f64>>,
    /// Supremizers that were kept, in generator order.
    pub supremizers: Vec<Vec<f64>>,
    /// Generator indices whose supremizer was dropped as linearly dependent.
    pub dropped: Vec<usize>,
    /// `Ψ_N`: `pod_vectors` then `supremizers`.
    pub combined: Vec<Vec<f64>>,
    /// V-Gram matrix of `combined`.
    pub reduced_gram: DMatrix<f64>,
}

impl PrimalBasis {
    pub fn len(&self) -> usize {
        self.combined.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combined.is_empty()
    }

    /// `Ψ_N` as an `H × N_V` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        columns_to_matrix(&self.combined, self.combined.first().map_or(0, Vec::len))
    }
}

pub(crate) fn columns_to_matrix(columns: &[Vec<f64>], rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

fn gram(vectors: &[Vec<f64>], ops: &AffineOperatorSet) -> DMatrix<f64> {
    let applied: Vec<Vec<f64>> = vectors.iter().map(|v| ops.x.matvec(v)).collect();
    let k = vectors.len();
    let g = DMatrix::from_fn(k, k, |i, j| dot(&vectors[i], &applied[j]));
    0.5 * (&g + g.transpose())
}

/// Appends `Bξⱼ` for every generator, skipping those that would make the
/// basis numerically dependent.
pub fn enrich_with_supremizers(
    pod_vectors: &[Vec<f64>],
    cone: &DualConeBasis,
    ops: &AffineOperatorSet,
) -> Result<PrimalBasis> {
    let mut combined = pod_vectors.to_vec();
    let mut supremizers = Vec::new();
    let mut dropped = Vec::new();
    for (j, xi) in cone.generators.iter().enumerate() {
        let sup = riesz_supremizer(xi, ops)?;
        combined.push(sup.clone());
        let condition = symmetric_condition(&gram(&combined, ops));
        if condition < GRAM_CONDITION_LIMIT {
            supremizers.push(sup);
        } else {
            combined.pop();
            log::warn!("supremizer {j} dropped: Gram condition number {condition:.3e}");
            dropped.push(j);
        }
    }
    let reduced_gram = gram(&combined, ops);
    Ok(PrimalBasis {
        pod_vectors: pod_vectors.to_vec(),
        supremizers,
        dropped,
        combined,
        reduced_gram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{DualVector, Mesh1D};

    fn ops() -> AffineOperatorSet {
        AffineOperatorSet::assemble(&Mesh1D::new(20, 300.0).unwrap()).unwrap()
    }

    fn unit_v(ops: &AffineOperatorSet, f: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut v: Vec<f64> = (0..ops.dim()).map(f).collect();
        let n = ops.v_norm(&v);
        v.iter_mut().for_each(|x| *x /= n);
        v
    }

    #[test]
    fn no_generators_keeps_pod_block() {
        let ops = ops();
        let pod = vec![unit_v(&ops, |i| (i as f64).sin())];
        let empty = DualConeBasis {
            generators: vec![],
            selected: vec![],
        };
        let basis = enrich_with_supremizers(&pod, &empty, &ops).unwrap();
        assert_eq!(basis.combined, pod);
        assert!(basis.supremizers.is_empty());
    }

    #[test]
    fn supremizers_satisfy_riesz_equation() {
        let ops = ops();
        let pod = vec![unit_v(&ops, |i| (i as f64 * 0.4).sin())];
        let cone = DualConeBasis {
            generators: vec![DualVector::unit(20, 3), DualVector::unit(20, 9)],
            selected: vec![],
        };
        let basis = enrich_with_supremizers(&pod, &cone, &ops).unwrap();
        assert_eq!(basis.len(), 3);
        for (s, xi) in basis.supremizers.iter().zip(&cone.generators) {
            let back = ops.x.matvec(s);
            for (a, b) in back.iter().zip(&xi.coeffs) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dependent_supremizer_is_dropped() {
        let ops = ops();
        let xi = DualVector::unit(20, 5);
        let sup = riesz_supremizer(&xi, &ops).unwrap();
        let cone = DualConeBasis {
            generators: vec![xi],
            selected: vec![],
        };
        let basis = enrich_with_supremizers(&[sup], &cone, &ops).unwrap();
        assert_eq!(basis.dropped, vec![0]);
        assert_eq!(basis.len(), 1);
    }
}
