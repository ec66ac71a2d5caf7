use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{AffineOperatorSet, Mesh1D, ObstacleData, ParameterVector};
use crate::truth::{solve_trajectory, SchemeConfig, Trajectory};

/// Truth trajectories for a training set on one mesh and time grid.
#[derive(Debug, Clone)]
pub struct SnapshotStore {
    pub params: Vec<ParameterVector>,
    pub trajectories: Vec<Trajectory>,
    pub obstacles: Vec<ObstacleData>,
    pub mesh: Mesh1D,
    pub config: SchemeConfig,
}

impl SnapshotStore {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn primal_snapshot_count(&self) -> usize {
        self.trajectories.iter().map(|t| t.u.len()).sum()
    }

    pub fn dual_snapshot_count(&self) -> usize {
        self.trajectories.iter().map(|t| t.lambda.len()).sum()
    }
}

/// Solves the truth problem for every training parameter.
///
/// Trajectories are computed in parallel; the store keeps the input order.
pub fn generate_snapshots(
    params: &[ParameterVector],
    mesh: &Mesh1D,
    ops: &AffineOperatorSet,
    config: &SchemeConfig,
) -> Result<SnapshotStore> {
    if params.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    for (i, a) in params.iter().enumerate() {
        if params[..i].contains(a) {
            return Err(Error::InvalidArgument(format!(
                "training parameter {a} appears more than once"
            )));
        }
    }
    let solved: Vec<(Trajectory, ObstacleData)> = params
        .par_iter()
        .map(|mu| {
            let tag = |e: Error| Error::Parameter {
                mu: mu.to_string(),
                source: Box::new(e),
            };
            let obstacle = ObstacleData::new(mesh, mu.k).map_err(tag)?;
            let traj = solve_trajectory(mu, ops, &obstacle, config).map_err(tag)?;
            Ok((traj, obstacle))
        })
        .collect::<Result<_>>()?;
    let (trajectories, obstacles) = solved.into_iter().unzip();
    Ok(SnapshotStore {
        params: params.to_vec(),
        trajectories,
        obstacles,
        mesh: mesh.clone(),
        config: *config,
    })
}
