//! Offline phase: snapshots, greedy basis construction and model assembly.

mod angle;
mod enrich;
mod io;
mod model;
mod pod;
mod sampling;
mod snapshots;

pub use angle::{
    angle_greedy, angle_greedy_truncating, angle_to_subspace, AngleGreedyOutput, DualConeBasis,
    SATURATION_ANGLE, ZERO_MULTIPLIER,
};
pub use enrich::{enrich_with_supremizers, PrimalBasis};
pub use io::{load_model, model_from_json, model_to_json, save_model, SCHEMA_VERSION};
pub use model::{
    assemble_reduced, GreedyDiagnostics, MeshDescriptor, ReducedModel, SelectionRecord,
    COUPLING_RANK_TOLERANCE, RECOMPUTE_TOLERANCE,
};
pub use pod::{pod1, pod1_with_energy, pod_greedy, pod_greedy_truncating, PodGreedyOutput, Selection};
pub use sampling::{sample_parameters, sample_test_set, sample_training_set, SampleStream};
pub use snapshots::{generate_snapshots, SnapshotStore};

use crate::error::{Error, Result};
use crate::fem::AffineOperatorSet;

/// Requested reduced dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// POD-greedy vectors `Ñ_V`.
    pub nv_tilde: usize,
    /// Cone generators `N_W`; zero disables the constraint in the reduced model.
    pub nw: usize,
}

/// What to do when the snapshots cannot supply the requested budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaturationPolicy {
    Fail,
    Truncate,
}

#[derive(Debug, Clone)]
pub struct OfflineOutput {
    pub model: ReducedModel,
    pub primal: PrimalBasis,
    pub cone: DualConeBasis,
    /// POD-greedy stopped early at this size.
    pub pod_saturated_at: Option<usize>,
    /// Angle-greedy stopped early at this size.
    pub cone_saturated_at: Option<usize>,
}

/// POD-greedy, angle-greedy, supremizer enrichment and reduced assembly.
pub fn build_reduced_model(
    store: &SnapshotStore,
    ops: &AffineOperatorSet,
    budget: Budget,
    policy: SaturationPolicy,
) -> Result<OfflineOutput> {
    // no usable snapshot at all is saturation at size zero
    let pod = match policy {
        SaturationPolicy::Fail => pod_greedy(store, budget.nv_tilde, ops),
        SaturationPolicy::Truncate => pod_greedy_truncating(store, budget.nv_tilde, ops),
    }
    .map_err(|e| match e {
        Error::DegenerateInput(_) => Error::BasisSaturation { achieved: 0 },
        other => other,
    })?;
    let angle = if budget.nw == 0 {
        None
    } else {
        let angle = match policy {
            SaturationPolicy::Fail => angle_greedy(store, budget.nw, ops),
            SaturationPolicy::Truncate => angle_greedy_truncating(store, budget.nw, ops),
        };
        Some(angle.map_err(|e| match e {
            Error::DegenerateInput(_) => Error::ConeSaturation { achieved: 0 },
            other => other,
        })?)
    };
    let (cone, eps_lambda, cone_saturated_at) = match angle {
        Some(a) => (a.cone, a.eps_lambda, a.saturated_at),
        None => (
            DualConeBasis {
                generators: Vec::new(),
                selected: Vec::new(),
            },
            Vec::new(),
            None,
        ),
    };
    let primal = enrich_with_supremizers(&pod.vectors, &cone, ops)?;

    let record = |(k, s): (usize, &Selection)| SelectionRecord {
        iteration: k + 1,
        mu_index: s.mu_index,
        mu: store.params[s.mu_index],
        step: s.step,
    };
    let diagnostics = GreedyDiagnostics {
        eps_u: pod.eps_u.clone(),
        eps_lambda,
        selected_params_u: pod.selections.iter().enumerate().map(record).collect(),
        selected_pairs_lambda: cone.selected.iter().enumerate().map(record).collect(),
        dropped_supremizers: primal.dropped.clone(),
    };
    let model = assemble_reduced(&primal, &cone, ops, &store.mesh, &store.config, diagnostics)?;
    if model.nv() == 0 {
        return Err(Error::BasisSaturation { achieved: 0 });
    }
    Ok(OfflineOutput {
        model,
        primal,
        cone,
        pod_saturated_at: pod.saturated_at,
        cone_saturated_at,
    })
}
