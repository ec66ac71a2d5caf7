//! Online phase: per-parameter reduced simulation and error measures.
//!
//! After [`online_setup`] every time step works only with `N_V × N_V` and
//! `N_W × N_W` matrices. The obstacle enters through `g_N = Ξᵀψ̃(μ)` and the
//! initial projection, which need one pass over the mesh per parameter since
//! `ψ̃` has a `K`-dependent kink.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{AffineOperatorSet, ObstacleData, ParameterBox, ParameterVector};
use crate::lcp::{solve_lcp_from, LcpProblem, SystemMatrix};
use crate::offline::ReducedModel;
use crate::report::fmt17;
use crate::truth::{solve_trajectory, SchemeConfig};

/// Per-parameter reduced operators, factorized once.
#[derive(Debug, Clone)]
pub struct OnlineData {
    pub mu: ParameterVector,
    /// `Mass_N/Δt + θ A_N(μ)`.
    pub s_n: DMatrix<f64>,
    pub a_n: DMatrix<f64>,
    pub f_n: DVector<f64>,
    /// `(g_N)ⱼ = ξⱼ(ψ̃(μ))`.
    pub g_n: DVector<f64>,
    /// V-orthogonal projection of `ψ̃(μ)` onto the primal space.
    pub u0_n: DVector<f64>,
    explicit: DMatrix<f64>,
    coupling: DMatrix<f64>,
    s_lu: LU<f64, Dyn, Dyn>,
    /// `S_N⁻¹ B_N`.
    s_inv_b: DMatrix<f64>,
    /// `B_Nᵀ S_N⁻¹ B_N`.
    schur: DMatrix<f64>,
}

impl OnlineData {
    pub fn schur(&self) -> &DMatrix<f64> {
        &self.schur
    }

    /// `(Mass_N/Δt − (1−θ)A_N) uₙ + f_N`.
    pub fn step_rhs(&self, u_prev: &DVector<f64>) -> DVector<f64> {
        &self.explicit * u_prev + &self.f_n
    }
}

pub fn online_setup(model: &ReducedModel, mu: &ParameterVector) -> Result<OnlineData> {
    mu.validate()?;
    let config = &model.config;
    let [c1, c2, c3] = AffineOperatorSet::operator_coefficients(mu);
    let [l1, l2] = AffineOperatorSet::load_coefficients(mu);
    let a_n = &model.a1 * c1 + &model.a2 * c2 + &model.a3 * c3;
    let f_n = &model.f1 * l1 + &model.f2 * l2;
    let inv_dt = 1.0 / config.delta_t();
    let s_n = &model.mass * inv_dt + &a_n * config.theta;
    let explicit = &model.mass * inv_dt - &a_n * (1.0 - config.theta);

    let mesh = model.mesh.build()?;
    let obstacle = ObstacleData::new(&mesh, mu.k)?;
    let psi_tilde = DVector::from_column_slice(&obstacle.psi_tilde);
    let g_n = model.xi.tr_mul(&psi_tilde);
    let init_rhs = model.init_rhs_factor.tr_mul(&psi_tilde);
    let u0_n = model
        .init_gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::ModelCorruption("init_gram is not positive definite".into()))?
        .solve(&init_rhs);
    let residual = (&model.init_gram * &u0_n - &init_rhs).amax();
    if residual > 1e-10 * init_rhs.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::ModelCorruption(format!(
            "initial projection residual {residual:.3e}"
        )));
    }

    let s_lu = s_n.clone().lu();
    let s_inv_b = if model.nw() == 0 {
        DMatrix::zeros(model.nv(), 0)
    } else {
        s_lu.solve(&model.coupling)
            .ok_or_else(|| Error::ModelCorruption("reduced step matrix is singular".into()))?
    };
    if !s_lu.is_invertible() {
        return Err(Error::ModelCorruption("reduced step matrix is singular".into()));
    }
    let schur = model.coupling.tr_mul(&s_inv_b);
    Ok(OnlineData {
        mu: *mu,
        s_n,
        a_n,
        f_n,
        g_n,
        u0_n,
        explicit,
        coupling: model.coupling.clone(),
        s_lu,
        s_inv_b,
        schur,
    })
}

#[derive(Debug, Clone)]
pub struct ReducedStep {
    pub u: DVector<f64>,
    /// Cone coefficients `α ≥ 0`.
    pub alpha: DVector<f64>,
    pub iterations: usize,
    active: Vec<bool>,
}

/// One reduced θ-step.
///
/// Solves `S_N u − B_N α = rhs`, `B_Nᵀu ≥ g_N`, `α ≥ 0`,
/// `αᵀ(B_Nᵀu − g_N) = 0` by eliminating `u` and running the active-set
/// solver on the `N_W × N_W` Schur complement.
pub fn reduced_step(u_prev: &DVector<f64>, data: &OnlineData) -> Result<ReducedStep> {
    reduced_step_from(u_prev, data, None)
}

fn reduced_step_from(
    u_prev: &DVector<f64>,
    data: &OnlineData,
    initial_active: Option<&[bool]>,
) -> Result<ReducedStep> {
    if u_prev.len() != data.s_n.nrows() {
        return Err(Error::InvalidArgument("reduced state has wrong length".into()));
    }
    let rhs = data.step_rhs(u_prev);
    let free = data
        .s_lu
        .solve(&rhs)
        .ok_or_else(|| Error::ModelCorruption("reduced step matrix is singular".into()))?;
    let nw = data.g_n.len();
    if nw == 0 {
        return Ok(ReducedStep {
            u: free,
            alpha: DVector::zeros(0),
            iterations: 0,
            active: Vec::new(),
        });
    }
    // w = Mα + q with M = BᵀS⁻¹B, q = BᵀS⁻¹rhs − g; in obstacle form the
    // unknown is α ≥ 0 and the multiplier is w.
    let q = data.coupling.tr_mul(&free) - &data.g_n;
    let problem = LcpProblem::new(
        SystemMatrix::Dense(data.schur.clone()),
        (-q).as_slice().to_vec(),
        vec![0.0; nw],
    )?;
    // without a warm start begin from α = 0, the unconstrained step
    let start = initial_active.map_or_else(|| vec![true; nw], <[bool]>::to_vec);
    let sol = solve_lcp_from(&problem, &start)?;
    let alpha = DVector::from_vec(sol.u);
    let u = free + &data.s_inv_b * &alpha;
    Ok(ReducedStep {
        u,
        alpha,
        iterations: sol.iterations,
        active: sol.active,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTrajectory {
    pub mu: ParameterVector,
    /// Reduced coefficients `u_N⁰ … u_N^L`.
    pub u_n: Vec<DVector<f64>>,
    /// Cone coefficients for steps `1 … L`.
    pub alpha: Vec<DVector<f64>>,
    pub iterations: Vec<usize>,
}

impl ReducedTrajectory {
    /// Feasibility and complementarity against the reduced cone.
    pub fn feasibility(&self, model: &ReducedModel, data: &OnlineData) -> ReducedFeasibility {
        let mut report = ReducedFeasibility {
            min_alpha: f64::INFINITY,
            min_gap: f64::INFINITY,
            max_complementarity: 0.0,
        };
        for (u, alpha) in self.u_n.iter().skip(1).zip(&self.alpha) {
            let gap = model.coupling.tr_mul(u) - &data.g_n;
            report.min_alpha = report.min_alpha.min(alpha.min());
            report.min_gap = report.min_gap.min(gap.min());
            let scale = 1.0 + alpha.amax() * (model.coupling.tr_mul(u).amax() + data.g_n.amax());
            report.max_complementarity = report.max_complementarity.max(alpha.dot(&gap).abs() / scale);
        }
        if self.alpha.iter().all(|a| a.is_empty()) {
            report.min_alpha = 0.0;
            report.min_gap = 0.0;
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedFeasibility {
    pub min_alpha: f64,
    /// `min(B_Nᵀu − g_N)` over all steps.
    pub min_gap: f64,
    pub max_complementarity: f64,
}

/// All `L` reduced steps for `mu` with the model's time grid.
pub fn reduced_trajectory(model: &ReducedModel, mu: &ParameterVector) -> Result<ReducedTrajectory> {
    let data = online_setup(model, mu)?;
    reduced_trajectory_with(model, &data)
}

pub fn reduced_trajectory_with(model: &ReducedModel, data: &OnlineData) -> Result<ReducedTrajectory> {
    let steps = model.config.steps;
    let mut u_n = Vec::with_capacity(steps + 1);
    let mut alpha = Vec::with_capacity(steps);
    let mut iterations = Vec::with_capacity(steps);
    u_n.push(data.u0_n.clone());
    let mut active: Option<Vec<bool>> = None;
    for n in 1..=steps {
        let step = reduced_step_from(&u_n[n - 1], data, active.as_deref()).map_err(|e| e.at_step(n))?;
        active = Some(step.active);
        u_n.push(step.u);
        alpha.push(step.alpha);
        iterations.push(step.iterations);
    }
    Ok(ReducedTrajectory {
        mu: data.mu,
        u_n,
        alpha,
        iterations,
    })
}

/// Nodal values of a reduced trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalTrajectory {
    /// `Ψ u_Nⁿ` per step.
    pub u: Vec<Vec<f64>>,
    /// `Ξ αⁿ` per step `1 … L`.
    pub lambda: Vec<Vec<f64>>,
    /// `P₀(K)` at the interior nodes.
    pub p0: Vec<f64>,
}

impl NodalTrajectory {
    pub fn price(&self, step: usize) -> Vec<f64> {
        self.u[step].iter().zip(&self.p0).map(|(a, b)| a + b).collect()
    }
}

pub fn reconstruct(model: &ReducedModel, rt: &ReducedTrajectory) -> Result<NodalTrajectory> {
    if rt.u_n.iter().any(|u| u.len() != model.nv()) || rt.alpha.iter().any(|a| a.len() != model.nw()) {
        return Err(Error::InvalidArgument("reduced trajectory does not match the model".into()));
    }
    let mesh = model.mesh.build()?;
    let obstacle = ObstacleData::new(&mesh, rt.mu.k)?;
    let u = rt
        .u_n
        .iter()
        .map(|c| (&model.psi * c).as_slice().to_vec())
        .collect();
    let lambda = rt
        .alpha
        .iter()
        .map(|a| (&model.xi * a).as_slice().to_vec())
        .collect();
    Ok(NodalTrajectory {
        u,
        lambda,
        p0: obstacle.p0,
    })
}

/// `sqrt(Δt Σₙ ‖uⁿ − u_Nⁿ‖²_V)` over `n = 0 … L`.
pub fn err_n(
    truth: &[Vec<f64>],
    reduced: &[Vec<f64>],
    ops: &AffineOperatorSet,
    config: &SchemeConfig,
) -> Result<f64> {
    if truth.len() != config.steps + 1 || reduced.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "trajectories of length {} and {} for L = {}",
            truth.len(),
            reduced.len(),
            config.steps
        )));
    }
    let mut sum = 0.0;
    for (a, b) in truth.iter().zip(reduced) {
        if a.len() != ops.dim() || b.len() != ops.dim() {
            return Err(Error::InvalidArgument("nodal vectors do not match the mesh".into()));
        }
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        sum += ops.v_inner(&d, &d).max(0.0);
    }
    Ok((config.delta_t() * sum).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorEntry {
    pub mu: ParameterVector,
    pub err_n: f64,
    /// `false` when `mu` lies outside the parameter box (extrapolation).
    pub in_box: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub entries: Vec<ErrorEntry>,
    pub err_linf: f64,
    pub nv_tilde: usize,
    pub nw: usize,
    pub nv: usize,
}

impl ErrorReport {
    /// `K,r,q,sigma,err_N` per test parameter, then an `ERR_LINF` row.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "K,r,q,sigma,err_N")?;
        for e in &self.entries {
            let [k, r, q, sigma] = e.mu.as_array().map(fmt17);
            writeln!(out, "{k},{r},{q},{sigma},{}", fmt17(e.err_n))?;
        }
        writeln!(out, "ERR_LINF,,,,{}", fmt17(self.err_linf))
    }
}

/// Truth and reduced solve for each test parameter, and the worst `err_N`.
pub fn err_linf(
    model: &ReducedModel,
    test_set: &[ParameterVector],
    ops: &AffineOperatorSet,
    bounds: Option<&ParameterBox>,
) -> Result<ErrorReport> {
    if test_set.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    let mesh = model.mesh.build()?;
    let entries = test_set
        .par_iter()
        .map(|mu| {
            let obstacle = ObstacleData::new(&mesh, mu.k)?;
            let truth = solve_trajectory(mu, ops, &obstacle, &model.config)?;
            let reduced = reconstruct(model, &reduced_trajectory(model, mu)?)?;
            Ok(ErrorEntry {
                mu: *mu,
                err_n: err_n(&truth.u, &reduced.u, ops, &model.config)?,
                in_box: bounds.map_or(true, |b| b.contains(mu)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let err_linf = entries.iter().map(|e| e.err_n).fold(0.0_f64, f64::max);
    Ok(ErrorReport {
        entries,
        err_linf,
        nv_tilde: model.nv_tilde,
        nw: model.nw(),
        nv: model.nv(),
    })
}
