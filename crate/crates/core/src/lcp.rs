//! Obstacle-form linear complementarity problems.
//!
//! Find `u`, `λ` with `S u − λ = rhs`, `u ≥ ψ`, `λ ≥ 0`, `λᵀ(u − ψ) = 0`.
//!
//! The primary solver is the primal-dual active-set iteration with `c = 1`.
//! On an active-set cycle it hands over to Murty's least-index principal
//! pivoting, which terminates for every P-matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Tridiagonal};

/// Active-set updates allowed before giving up.
pub const MAX_ACTIVE_SET_UPDATES: usize = 100;

const PDAS_C: f64 = 1.0;

#[derive(Debug, Clone)]
pub enum SystemMatrix {
    Dense(DMatrix<f64>),
    Tridiagonal(Tridiagonal),
}

impl SystemMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SystemMatrix::Dense(m) => m.nrows(),
            SystemMatrix::Tridiagonal(t) => t.dim(),
        }
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        match self {
            SystemMatrix::Dense(m) => m[(i, i)],
            SystemMatrix::Tridiagonal(t) => t.diag[i],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SystemMatrix::Dense(m) => (m * DVector::from_column_slice(x)).as_slice().to_vec(),
            SystemMatrix::Tridiagonal(t) => t.matvec(x),
        }
    }

    /// Solves the system with rows in `fixed` replaced by `uᵢ = valuesᵢ`.
    fn solve_fixed(&self, fixed: &[bool], rhs: &[f64], values: &[f64]) -> Result<Vec<f64>> {
        let b: Vec<f64> = (0..rhs.len())
            .map(|i| if fixed[i] { values[i] } else { rhs[i] })
            .collect();
        let mut u = match self {
            SystemMatrix::Tridiagonal(t) => {
                let mut m = t.clone();
                for (i, _) in fixed.iter().enumerate().filter(|(_, &f)| f) {
                    m.diag[i] = 1.0;
                    if i > 0 {
                        m.lower[i - 1] = 0.0;
                    }
                    if i + 1 < m.dim() {
                        m.upper[i] = 0.0;
                    }
                }
                m.lu()?.solve(&b)
            }
            SystemMatrix::Dense(d) => {
                let mut m = d.clone();
                for (i, _) in fixed.iter().enumerate().filter(|(_, &f)| f) {
                    m.row_mut(i).fill(0.0);
                    m[(i, i)] = 1.0;
                }
                m.lu()
                    .solve(&DVector::from_vec(b))
                    .ok_or_else(|| {
                        Error::NumericalBreakdown("singular active-set subsystem".into())
                    })?
                    .as_slice()
                    .to_vec()
            }
        };
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown(
                "non-finite active-set solution".into(),
            ));
        }
        for (i, _) in fixed.iter().enumerate().filter(|(_, &f)| f) {
            u[i] = values[i];
        }
        Ok(u)
    }
}

#[derive(Debug, Clone)]
pub struct LcpProblem {
    matrix: SystemMatrix,
    rhs: Vec<f64>,
    obstacle: Vec<f64>,
}

impl LcpProblem {
    pub fn new(matrix: SystemMatrix, rhs: Vec<f64>, obstacle: Vec<f64>) -> Result<Self> {
        let n = matrix.dim();
        if rhs.len() != n || obstacle.len() != n {
            return Err(Error::InvalidArgument(format!(
                "LCP of size {n} with rhs {} and obstacle {}",
                rhs.len(),
                obstacle.len()
            )));
        }
        if let SystemMatrix::Dense(m) = &matrix {
            if m.ncols() != n {
                return Err(Error::InvalidArgument("LCP matrix must be square".into()));
            }
        }
        if let Some(i) = (0..n).find(|&i| !(matrix.diagonal(i) > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "LCP matrix diagonal must be positive (entry {i} is {})",
                matrix.diagonal(i)
            )));
        }
        Ok(Self {
            matrix,
            rhs,
            obstacle,
        })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn matrix(&self) -> &SystemMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn obstacle(&self) -> &[f64] {
        &self.obstacle
    }

    /// `(u, λ)` for a given active set; `λ` vanishes exactly off the set.
    pub fn solve_active_set(&self, active: &[bool]) -> Result<(Vec<f64>, Vec<f64>)> {
        let u = self.matrix.solve_fixed(active, &self.rhs, &self.obstacle)?;
        let su = self.matrix.apply(&u);
        let lambda = (0..self.dim())
            .map(|i| if active[i] { su[i] - self.rhs[i] } else { 0.0 })
            .collect();
        Ok((u, lambda))
    }

    pub fn residuals(&self, u: &[f64], lambda: &[f64]) -> LcpResiduals {
        let su = self.matrix.apply(u);
        let linear = su
            .iter()
            .zip(lambda)
            .zip(&self.rhs)
            .fold(0.0_f64, |m, ((a, l), b)| m.max((a - l - b).abs()));
        let scale = norm_inf(&self.rhs).max(norm_inf(&su)).max(norm_inf(lambda));
        let gap: Vec<f64> = u.iter().zip(&self.obstacle).map(|(a, b)| a - b).collect();
        LcpResiduals {
            linear_relative: if scale > 0.0 { linear / scale } else { linear },
            min_gap: gap.iter().copied().fold(f64::INFINITY, f64::min),
            min_multiplier: lambda.iter().copied().fold(f64::INFINITY, f64::min),
            complementarity: lambda.iter().zip(&gap).map(|(l, g)| l * g).sum::<f64>().abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcpResiduals {
    /// `‖S u − λ − rhs‖∞` relative to the largest term.
    pub linear_relative: f64,
    /// `min(u − ψ)`.
    pub min_gap: f64,
    /// `min(λ)`.
    pub min_multiplier: f64,
    /// `|λᵀ(u − ψ)|`.
    pub complementarity: f64,
}

impl std::fmt::Display for LcpResiduals {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "linear={:.3e}, min(u-psi)={:.3e}, min(lambda)={:.3e}, complementarity={:.3e}",
            self.linear_relative, self.min_gap, self.min_multiplier, self.complementarity
        )
    }
}

#[derive(Debug, Clone)]
pub struct LcpSolution {
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Number of active-set linear solves.
    pub iterations: usize,
    pub active: Vec<bool>,
}

/// Solves the LCP starting from an empty active set.
pub fn solve_lcp(problem: &LcpProblem) -> Result<LcpSolution> {
    solve_lcp_from(problem, &vec![false; problem.dim()])
}

/// Solves the LCP starting from `initial_active`.
pub fn solve_lcp_from(problem: &LcpProblem, initial_active: &[bool]) -> Result<LcpSolution> {
    let n = problem.dim();
    if initial_active.len() != n {
        return Err(Error::InvalidArgument("initial active set has wrong length".into()));
    }
    let mut active = initial_active.to_vec();
    let mut history: Vec<Vec<bool>> = Vec::new();
    let mut iterations = 0;
    let mut last = None;
    while iterations < MAX_ACTIVE_SET_UPDATES {
        let (u, lambda) = problem.solve_active_set(&active)?;
        iterations += 1;
        let next: Vec<bool> = (0..n)
            .map(|i| lambda[i] + PDAS_C * (problem.obstacle[i] - u[i]) > 0.0)
            .collect();
        if next == active {
            return Ok(LcpSolution {
                u,
                lambda,
                iterations,
                active,
            });
        }
        history.push(std::mem::replace(&mut active, next));
        if history.contains(&active) {
            log::debug!("active-set cycle after {iterations} solves, switching to pivoting");
            return least_index_pivoting(problem, active, iterations);
        }
        last = Some((u, lambda));
    }
    Err(divergence(problem, iterations, last))
}

/// Murty's least-index principal pivoting, finite for P-matrices.
fn least_index_pivoting(
    problem: &LcpProblem,
    mut active: Vec<bool>,
    mut iterations: usize,
) -> Result<LcpSolution> {
    let n = problem.dim();
    let budget = iterations + MAX_ACTIVE_SET_UPDATES.max(10 * n);
    let mut last = None;
    while iterations < budget {
        let (u, lambda) = problem.solve_active_set(&active)?;
        iterations += 1;
        let violated = (0..n).find(|&i| {
            if active[i] {
                lambda[i] < 0.0
            } else {
                u[i] < problem.obstacle[i]
            }
        });
        match violated {
            None => {
                return Ok(LcpSolution {
                    u,
                    lambda,
                    iterations,
                    active,
                })
            }
            Some(i) => active[i] = !active[i],
        }
        last = Some((u, lambda));
    }
    Err(divergence(problem, iterations, last))
}

fn divergence(problem: &LcpProblem, iterations: usize, last: Option<(Vec<f64>, Vec<f64>)>) -> Error {
    let residuals = last
        .map(|(u, l)| problem.residuals(&u, &l).to_string())
        .unwrap_or_else(|| "none".into());
    Error::SolverDivergence {
        iterations,
        residuals,
    }
}
