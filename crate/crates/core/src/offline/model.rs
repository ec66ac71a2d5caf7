use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{AffineOperatorSet, Mesh1D, ParameterVector, GRAM_CONDITION_LIMIT};
use crate::linalg::symmetric_condition;
use crate::truth::SchemeConfig;

use super::angle::DualConeBasis;
use super::enrich::{columns_to_matrix, PrimalBasis};

/// Smallest admissible `σ_min / σ_max` of the reduced coupling matrix.
pub const COUPLING_RANK_TOLERANCE: f64 = 1e-10;

/// Relative tolerance of the recomputation check on load.
pub const RECOMPUTE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshDescriptor {
    #[serde(rename = "H")]
    pub interior: usize,
    pub s_f: f64,
}

impl Default for MeshDescriptor {
    fn default() -> Self {
        Self {
            interior: 99,
            s_f: 300.0,
        }
    }
}

impl MeshDescriptor {
    pub fn of(mesh: &Mesh1D) -> Self {
        Self {
            interior: mesh.interior(),
            s_f: mesh.s_f(),
        }
    }

    pub fn build(&self) -> Result<Mesh1D> {
        Mesh1D::new(self.interior, self.s_f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    /// 1-based greedy iteration that added the vector.
    pub iteration: usize,
    pub mu_index: usize,
    pub mu: ParameterVector,
    /// Time step of the selected snapshot, when a single one was used.
    pub step: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyDiagnostics {
    pub eps_u: Vec<f64>,
    pub eps_lambda: Vec<f64>,
    pub selected_params_u: Vec<SelectionRecord>,
    pub selected_pairs_lambda: Vec<SelectionRecord>,
    pub dropped_supremizers: Vec<usize>,
}

/// Everything the online phase needs, projected onto the reduced spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedModel {
    pub mesh: MeshDescriptor,
    pub config: SchemeConfig,
    /// Size of the POD block at the front of `psi`.
    pub nv_tilde: usize,
    /// `Ψ_N`, `H × N_V`.
    pub psi: DMatrix<f64>,
    /// Cone generators `Ξ_N`, `H × N_W`.
    pub xi: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub a3: DMatrix<f64>,
    pub f1: DVector<f64>,
    pub f2: DVector<f64>,
    /// `B_N = Ψᵀ Ξ`, so `(B_N)ᵢⱼ = ξⱼ(ψᵢ)`.
    pub coupling: DMatrix<f64>,
    /// `Ψᵀ X Ψ`.
    pub init_gram: DMatrix<f64>,
    /// `X Ψ`.
    pub init_rhs_factor: DMatrix<f64>,
    pub diagnostics: GreedyDiagnostics,
}

impl ReducedModel {
    pub fn nv(&self) -> usize {
        self.psi.ncols()
    }

    pub fn nw(&self) -> usize {
        self.xi.ncols()
    }

    pub fn h(&self) -> usize {
        self.psi.nrows()
    }

    /// Projects the full operators onto `psi` and `xi`.
    pub fn from_bases(
        psi: DMatrix<f64>,
        xi: DMatrix<f64>,
        nv_tilde: usize,
        ops: &AffineOperatorSet,
        mesh: &Mesh1D,
        config: &SchemeConfig,
        diagnostics: GreedyDiagnostics,
    ) -> Result<Self> {
        let h = ops.dim();
        if psi.nrows() != h || xi.nrows() != h || mesh.interior() != h {
            return Err(Error::InvalidArgument(
                "bases and operators come from different meshes".into(),
            ));
        }
        if psi.ncols() == 0 || nv_tilde > psi.ncols() {
            return Err(Error::InvalidArgument("empty or inconsistent primal basis".into()));
        }
        let (mass, a1, a2, a3, f1, f2, coupling, init_gram, init_rhs_factor) =
            project(&psi, &xi, ops);
        let model = Self {
            mesh: MeshDescriptor::of(mesh),
            config: *config,
            nv_tilde,
            psi,
            xi,
            mass,
            a1,
            a2,
            a3,
            f1,
            f2,
            coupling,
            init_gram,
            init_rhs_factor,
            diagnostics,
        };
        model.check_coupling_rank()?;
        Ok(model)
    }

    /// `σ_min / σ_max` of `B_N` (1 when there are no generators).
    pub fn coupling_rank_ratio(&self) -> f64 {
        if self.nw() == 0 {
            return 1.0;
        }
        if self.nw() > self.nv() {
            return 0.0;
        }
        let sv = self.coupling.singular_values();
        let max = sv.iter().copied().fold(0.0_f64, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if max > 0.0 {
            min / max
        } else {
            0.0
        }
    }

    pub fn check_coupling_rank(&self) -> Result<()> {
        let ratio = self.coupling_rank_ratio();
        if ratio > COUPLING_RANK_TOLERANCE {
            Ok(())
        } else {
            Err(Error::InfSupFailure { ratio })
        }
    }

    /// Re-runs every model invariant against freshly assembled operators.
    pub fn validate(&self) -> Result<()> {
        let corrupt = |msg: String| Error::ModelCorruption(msg);
        let (h, nv, nw) = (self.h(), self.nv(), self.nw());
        let shapes = [
            ("xi_matrix", self.xi.shape(), (h, nw)),
            ("Mass_N", self.mass.shape(), (nv, nv)),
            ("A1_N", self.a1.shape(), (nv, nv)),
            ("A2_N", self.a2.shape(), (nv, nv)),
            ("A3_N", self.a3.shape(), (nv, nv)),
            ("f1_N", self.f1.shape(), (nv, 1)),
            ("f2_N", self.f2.shape(), (nv, 1)),
            ("B_N", self.coupling.shape(), (nv, nw)),
            ("init_gram", self.init_gram.shape(), (nv, nv)),
            ("init_rhs_factor", self.init_rhs_factor.shape(), (h, nv)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(corrupt(format!("{name} has shape {got:?}, expected {want:?}")));
            }
        }
        if self.mesh.interior != h {
            return Err(corrupt(format!("mesh has H={} but psi_matrix has {h} rows", self.mesh.interior)));
        }
        if nv == 0 || self.nv_tilde > nv {
            return Err(corrupt(format!("inconsistent basis sizes NV={nv}, NV_tilde={}", self.nv_tilde)));
        }
        self.config.validate().map_err(|e| corrupt(e.to_string()))?;
        let mesh = self.mesh.build().map_err(|e| corrupt(e.to_string()))?;
        let ops = AffineOperatorSet::assemble(&mesh)?;
        let (mass, a1, a2, a3, f1, f2, coupling, init_gram, init_rhs_factor) =
            project(&self.psi, &self.xi, &ops);
        let checks: [(&str, &DMatrix<f64>, DMatrix<f64>); 7] = [
            ("Mass_N", &self.mass, mass),
            ("A1_N", &self.a1, a1),
            ("A2_N", &self.a2, a2),
            ("A3_N", &self.a3, a3),
            ("B_N", &self.coupling, coupling),
            ("init_gram", &self.init_gram, init_gram),
            ("init_rhs_factor", &self.init_rhs_factor, init_rhs_factor),
        ];
        for (name, stored, fresh) in checks {
            check_close(name, stored.as_slice(), fresh.as_slice())?;
        }
        check_close("f1_N", self.f1.as_slice(), f1.as_slice())?;
        check_close("f2_N", self.f2.as_slice(), f2.as_slice())?;
        let condition = symmetric_condition(&self.init_gram);
        if !(condition < GRAM_CONDITION_LIMIT) {
            return Err(corrupt(format!("init_gram condition number {condition:.3e}")));
        }
        self.check_coupling_rank()
    }
}

fn check_close(name: &str, stored: &[f64], fresh: &[f64]) -> Result<()> {
    let scale = fresh.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let diff = stored
        .iter()
        .zip(fresh)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if stored.iter().any(|v| !v.is_finite()) || diff > RECOMPUTE_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ModelCorruption(format!(
            "{name} differs from its recomputation by {diff:.3e} (scale {scale:.3e})"
        )));
    }
    Ok(())
}

type Projected = (
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DVector<f64>,
    DVector<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
    DMatrix<f64>,
);

fn project(psi: &DMatrix<f64>, xi: &DMatrix<f64>, ops: &AffineOperatorSet) -> Projected {
    let psi_t = psi.transpose();
    let init_rhs_factor = ops.x.apply_columns(psi);
    (
        ops.mass.congruence(psi),
        ops.a1.congruence(psi),
        ops.a2.congruence(psi),
        ops.a3.congruence(psi),
        &psi_t * DVector::from_column_slice(&ops.f1),
        &psi_t * DVector::from_column_slice(&ops.f2),
        &psi_t * xi,
        &psi_t * &init_rhs_factor,
        init_rhs_factor,
    )
}

/// Builds the reduced model from the enriched primal basis and the cone.
pub fn assemble_reduced(
    basis: &PrimalBasis,
    cone: &DualConeBasis,
    ops: &AffineOperatorSet,
    mesh: &Mesh1D,
    config: &SchemeConfig,
    diagnostics: GreedyDiagnostics,
) -> Result<ReducedModel> {
    let h = ops.dim();
    let psi = basis.matrix();
    let xi = columns_to_matrix(
        &cone
            .generators
            .iter()
            .map(|g| g.coeffs.clone())
            .collect::<Vec<_>>(),
        h,
    );
    ReducedModel::from_bases(psi, xi, basis.pod_vectors.len(), ops, mesh, config, diagnostics)
}
