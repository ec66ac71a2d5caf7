//! Reduced basis simulation of parametrized American put options.
//!
//! The put price solves a time-dependent variational inequality in the asset
//! variable. The crate provides
//!
//! * a P1 finite-element truth solver with a θ-scheme in time, where each
//!   step is a complementarity problem ([`fem`], [`lcp`], [`truth`]);
//! * offline construction of a primal reduced basis by POD-greedy with
//!   supremizer enrichment and of a reduced dual cone by angle-greedy
//!   ([`offline`]);
//! * online reduced simulation whose per-step cost does not depend on the
//!   mesh size, plus the error measures used to judge it ([`online`]);
//! * a command-line pipeline that writes CSV/JSON artifacts ([`cli`]).

pub mod cli;
pub mod error;
pub mod fem;
pub mod lcp;
pub mod linalg;
pub mod offline;
pub mod online;
pub mod report;
pub mod truth;

pub use error::{Error, Result};
pub use fem::{
    riesz_supremizer, v_project, w_inner, w_norm, AffineOperatorSet, DualVector, Mesh1D,
    ObstacleData, ParameterBox, ParameterVector,
};
pub use lcp::{solve_lcp, LcpProblem, LcpSolution, SystemMatrix};
pub use offline::{ReducedModel, SnapshotStore};
pub use online::{ErrorReport, OnlineData, ReducedTrajectory};
pub use truth::{solve_trajectory, theta_step, SchemeConfig, Trajectory};
