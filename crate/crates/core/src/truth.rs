//! Full-order θ-scheme for the discrete variational inequality.
//!
//! Each step solves
//! `(M/Δt + θA(μ)) uⁿ⁺¹ − λⁿ⁺¹ = (M/Δt − (1−θ)A(μ)) uⁿ + f(μ)` subject to the
//! nodal obstacle `uⁿ⁺¹ ≥ ψ̃` with complementary `λⁿ⁺¹ ≥ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{AffineOperatorSet, ObstacleData, ParameterVector};
use crate::lcp::{solve_lcp_from, LcpProblem, LcpResiduals, SystemMatrix};
use crate::linalg::{norm_inf, Tridiagonal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    /// Horizon in years.
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Number of time steps.
    #[serde(rename = "L")]
    pub steps: usize,
    pub theta: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            steps: 20,
            theta: 0.5,
        }
    }
}

impl SchemeConfig {
    pub fn new(horizon: f64, steps: usize, theta: f64) -> Result<Self> {
        let config = Self {
            horizon,
            steps,
            theta,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("need at least one time step".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidArgument(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn delta_t(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.delta_t()
    }
}

/// Primal and dual coefficients of one truth solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mu: ParameterVector,
    pub config: SchemeConfig,
    /// `u⁰ … u^L`.
    pub u: Vec<Vec<f64>>,
    /// `λ¹ … λ^L`; `lambda[n - 1]` belongs to step `n`.
    pub lambda: Vec<Vec<f64>>,
    /// Active-set solves per step.
    pub iterations: Vec<usize>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.lambda.len()
    }

    /// Multiplier at step `n ≥ 1`.
    pub fn lambda_at(&self, n: usize) -> Option<&[f64]> {
        n.checked_sub(1)
            .and_then(|i| self.lambda.get(i))
            .map(Vec::as_slice)
    }

    /// Worst feasibility and complementarity over all steps.
    pub fn feasibility(&self, obstacle: &ObstacleData) -> FeasibilityReport {
        let mut report = FeasibilityReport {
            min_gap: f64::INFINITY,
            min_multiplier: f64::INFINITY,
            max_complementarity: 0.0,
        };
        for (u, lambda) in self.u.iter().skip(1).zip(&self.lambda) {
            let mut comp = 0.0;
            for ((ui, li), pi) in u.iter().zip(lambda).zip(&obstacle.psi_tilde) {
                report.min_gap = report.min_gap.min(ui - pi);
                report.min_multiplier = report.min_multiplier.min(*li);
                comp += li * (ui - pi);
            }
            let scale = 1.0 + norm_inf(u) * norm_inf(lambda);
            report.max_complementarity = report.max_complementarity.max(comp.abs() / scale);
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// `min over n ≥ 1 of min(uⁿ − ψ̃)`.
    pub min_gap: f64,
    /// `min over n ≥ 1 of min(λⁿ)`.
    pub min_multiplier: f64,
    /// `max |λⁿ·(uⁿ − ψ̃)| / (1 + ‖uⁿ‖∞‖λⁿ‖∞)`.
    pub max_complementarity: f64,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    pub iterations: usize,
    pub active: Vec<bool>,
}

/// Step matrices for one parameter, built once and reused for every step.
#[derive(Debug, Clone)]
pub struct ThetaStepper<'a> {
    obstacle: &'a ObstacleData,
    implicit: Tridiagonal,
    explicit: Tridiagonal,
    load: Vec<f64>,
}

impl<'a> ThetaStepper<'a> {
    pub fn new(
        mu: &ParameterVector,
        ops: &AffineOperatorSet,
        obstacle: &'a ObstacleData,
        config: &SchemeConfig,
    ) -> Result<Self> {
        mu.validate()?;
        config.validate()?;
        if obstacle.psi_tilde.len() != ops.dim() {
            return Err(Error::InvalidArgument(
                "obstacle and operators come from different meshes".into(),
            ));
        }
        let a = ops.operator(mu);
        let inv_dt = 1.0 / config.delta_t();
        let implicit = Tridiagonal::combine(&[(inv_dt, &ops.mass), (config.theta, &a)]);
        let explicit = Tridiagonal::combine(&[(inv_dt, &ops.mass), (config.theta - 1.0, &a)]);
        Ok(Self {
            obstacle,
            implicit,
            explicit,
            load: ops.load(mu),
        })
    }

    pub fn implicit_matrix(&self) -> &Tridiagonal {
        &self.implicit
    }

    /// The complementarity problem advancing `u_prev` by one step.
    pub fn problem(&self, u_prev: &[f64]) -> Result<LcpProblem> {
        let rhs = self
            .explicit
            .matvec(u_prev)
            .into_iter()
            .zip(&self.load)
            .map(|(a, f)| a + f)
            .collect();
        LcpProblem::new(
            SystemMatrix::Tridiagonal(self.implicit.clone()),
            rhs,
            self.obstacle.psi_tilde.clone(),
        )
    }

    pub fn step(&self, u_prev: &[f64], initial_active: &[bool]) -> Result<StepOutput> {
        let problem = self.problem(u_prev)?;
        let sol = solve_lcp_from(&problem, initial_active)?;
        Ok(StepOutput {
            u: sol.u,
            lambda: sol.lambda,
            iterations: sol.iterations,
            active: sol.active,
        })
    }

    /// Plain linear step with the constraint switched off.
    pub fn unconstrained_step(&self, u_prev: &[f64]) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = self
            .explicit
            .matvec(u_prev)
            .into_iter()
            .zip(&self.load)
            .map(|(a, f)| a + f)
            .collect();
        Ok(self.implicit.lu()?.solve(&rhs))
    }
}

/// One θ-step from `u_prev`.
pub fn theta_step(
    u_prev: &[f64],
    mu: &ParameterVector,
    ops: &AffineOperatorSet,
    obstacle: &ObstacleData,
    config: &SchemeConfig,
) -> Result<StepOutput> {
    if u_prev.len() != ops.dim() {
        return Err(Error::InvalidArgument("previous state has wrong length".into()));
    }
    ThetaStepper::new(mu, ops, obstacle, config)?.step(u_prev, &vec![false; ops.dim()])
}

/// Runs all `L` steps from `u⁰ = ψ̃`.
pub fn solve_trajectory(
    mu: &ParameterVector,
    ops: &AffineOperatorSet,
    obstacle: &ObstacleData,
    config: &SchemeConfig,
) -> Result<Trajectory> {
    let stepper = ThetaStepper::new(mu, ops, obstacle, config)?;
    let mut u = Vec::with_capacity(config.steps + 1);
    let mut lambda = Vec::with_capacity(config.steps);
    let mut iterations = Vec::with_capacity(config.steps);
    u.push(obstacle.psi_tilde.clone());
    let mut active = vec![false; ops.dim()];
    for n in 1..=config.steps {
        let out = stepper
            .step(&u[n - 1], &active)
            .map_err(|e| e.at_step(n))?;
        active = out.active;
        u.push(out.u);
        lambda.push(out.lambda);
        iterations.push(out.iterations);
    }
    Ok(Trajectory {
        mu: *mu,
        config: *config,
        u,
        lambda,
        iterations,
    })
}

/// The same scheme without the obstacle constraint (European put).
pub fn solve_trajectory_unconstrained(
    mu: &ParameterVector,
    ops: &AffineOperatorSet,
    obstacle: &ObstacleData,
    config: &SchemeConfig,
) -> Result<Vec<Vec<f64>>> {
    let stepper = ThetaStepper::new(mu, ops, obstacle, config)?;
    let lu = stepper.implicit.lu()?;
    let mut u = vec![obstacle.psi_tilde.clone()];
    for n in 1..=config.steps {
        let mut rhs = stepper.explicit.matvec(&u[n - 1]);
        rhs.iter_mut().zip(&stepper.load).for_each(|(a, f)| *a += f);
        lu.solve_in_place(&mut rhs);
        u.push(rhs);
    }
    Ok(u)
}

/// Linear and complementarity residuals of every step, recomputed from scratch.
pub fn step_residuals(
    trajectory: &Trajectory,
    ops: &AffineOperatorSet,
    obstacle: &ObstacleData,
) -> Result<Vec<LcpResiduals>> {
    let stepper = ThetaStepper::new(&trajectory.mu, ops, obstacle, &trajectory.config)?;
    trajectory
        .u
        .windows(2)
        .zip(&trajectory.lambda)
        .map(|(pair, lambda)| Ok(stepper.problem(&pair[0])?.residuals(&pair[1], lambda)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh1D;

    fn setup() -> (Mesh1D, AffineOperatorSet, ObstacleData, ParameterVector) {
        let mesh = Mesh1D::new(99, 300.0).unwrap();
        let ops = AffineOperatorSet::assemble(&mesh).unwrap();
        let obstacle = ObstacleData::new(&mesh, 100.0).unwrap();
        let mu = ParameterVector::new(100.0, 0.05, 0.0015, 0.5).unwrap();
        (mesh, ops, obstacle, mu)
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::new(1.0, 20, 0.5).is_ok());
        assert!(SchemeConfig::new(1.0, 0, 0.5).is_err());
        assert!(SchemeConfig::new(1.0, 20, 1.5).is_err());
        assert!(SchemeConfig::new(0.0, 20, 0.5).is_err());
        let c = SchemeConfig::default();
        assert!((c.delta_t() * c.steps as f64 - c.horizon).abs() < 1e-14);
    }

    #[test]
    fn one_step_is_feasible() {
        let (_, ops, obstacle, mu) = setup();
        let config = SchemeConfig::default();
        let out = theta_step(&obstacle.psi_tilde, &mu, &ops, &obstacle, &config).unwrap();
        for i in 0..ops.dim() {
            assert!(out.u[i] >= obstacle.psi_tilde[i] - 1e-9);
            assert!(out.lambda[i] >= -1e-12);
            assert!((out.lambda[i] * (out.u[i] - obstacle.psi_tilde[i])).abs() <= 1e-9);
        }
    }

    #[test]
    fn trajectory_starts_at_obstacle_and_is_deterministic() {
        let (_, ops, obstacle, mu) = setup();
        let config = SchemeConfig::default();
        let a = solve_trajectory(&mu, &ops, &obstacle, &config).unwrap();
        let b = solve_trajectory(&mu, &ops, &obstacle, &config).unwrap();
        assert_eq!(a.u[0], obstacle.psi_tilde);
        assert_eq!(a.u.len(), 21);
        assert_eq!(a.lambda.len(), 20);
        assert_eq!(a, b);
        let f = a.feasibility(&obstacle);
        assert!(f.min_gap >= -1e-9 && f.min_multiplier >= -1e-12 && f.max_complementarity <= 1e-9);
        assert!(a.lambda_at(0).is_none());
        assert_eq!(a.lambda_at(1).unwrap(), a.lambda[0].as_slice());
    }

    #[test]
    fn price_dominates_payoff() {
        let (_, ops, obstacle, mu) = setup();
        let traj = solve_trajectory(&mu, &ops, &obstacle, &SchemeConfig::default()).unwrap();
        for u in &traj.u {
            for i in 0..ops.dim() {
                assert!(u[i] + obstacle.p0[i] >= obstacle.psi[i] - 1e-9);
            }
        }
    }

    #[test]
    fn degenerate_market_propagates_identity() {
        // σ → 0 is excluded by validation, so take a tiny σ and K small enough
        // that the load is negligible relative to the mass term.
        let mesh = Mesh1D::new(20, 300.0).unwrap();
        let ops = AffineOperatorSet::assemble(&mesh).unwrap();
        let obstacle = ObstacleData::new(&mesh, 1e-300).unwrap();
        let mu = ParameterVector::new(1e-300, 0.0, 0.0, 1e-160).unwrap();
        let config = SchemeConfig::default();
        let u_prev: Vec<f64> = (0..ops.dim()).map(|i| 1.0 + i as f64).collect();
        let out = theta_step(&u_prev, &mu, &ops, &obstacle, &config).unwrap();
        for i in 0..ops.dim() {
            assert!((out.u[i] - u_prev[i]).abs() < 1e-12 * u_prev[i]);
            assert_eq!(out.lambda[i], 0.0);
        }
    }

    #[test]
    fn stationary_limit_with_large_step() {
        // θ = 1 and Δt huge: the step solves A(μ)u − λ = f with u ≥ ψ̃.
        let (_, ops, obstacle, mu) = setup();
        let config = SchemeConfig::new(1e12, 1, 1.0).unwrap();
        let out = theta_step(&obstacle.psi_tilde, &mu, &ops, &obstacle, &config).unwrap();
        let a = ops.operator(&mu);
        let f = ops.load(&mu);
        let au = a.matvec(&out.u);
        let scale = norm_inf(&au).max(norm_inf(&f));
        for i in 0..ops.dim() {
            assert!((au[i] - out.lambda[i] - f[i]).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn mismatched_dimensions_error() {
        let (_, ops, obstacle, mu) = setup();
        let err = theta_step(&[0.0; 3], &mu, &ops, &obstacle, &SchemeConfig::default());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
