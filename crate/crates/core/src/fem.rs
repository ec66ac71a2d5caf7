//! P1 finite elements on a uniform asset grid.
//!
//! The primal space holds the `H` interior nodal values of the shifted price
//! `P − P₀`, which vanishes at `s = 0` and `s = s_f`. Multipliers live in the
//! dual basis biorthogonal to the nodal hat functions, so a multiplier is just
//! its coefficient vector and its action on a primal vector is a dot product.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_condition, Tridiagonal, TridiagonalCholesky};

/// Uniform grid `0 = s₀ < s₁ < … < s_{H+1} = s_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    s_f: f64,
    interior: usize,
    delta_s: f64,
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn new(interior: usize, s_f: f64) -> Result<Self> {
        if interior < 2 {
            return Err(Error::InvalidArgument(format!(
                "mesh needs at least 2 interior nodes, got {interior}"
            )));
        }
        if !(s_f > 0.0) || !s_f.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "upper asset bound must be positive, got {s_f}"
            )));
        }
        let cells = interior + 1;
        let delta_s = s_f / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * delta_s).collect();
        nodes[cells] = s_f;
        Ok(Self {
            s_f,
            interior,
            delta_s,
            nodes,
        })
    }

    pub fn s_f(&self) -> f64 {
        self.s_f
    }

    /// Number of interior nodes, i.e. the primal dimension.
    pub fn interior(&self) -> usize {
        self.interior
    }

    pub fn delta_s(&self) -> f64 {
        self.delta_s
    }

    /// All `H + 2` nodes including both boundary nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..=self.interior]
    }
}

/// Market parameters `μ = (K, r, q, σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    /// Strike.
    pub k: f64,
    /// Interest rate.
    pub r: f64,
    /// Dividend rate.
    pub q: f64,
    /// Volatility.
    pub sigma: f64,
}

impl ParameterVector {
    pub fn new(k: f64, r: f64, q: f64, sigma: f64) -> Result<Self> {
        let mu = Self { k, r, q, sigma };
        mu.validate()?;
        Ok(mu)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.k, self.r, self.q, self.sigma].iter().all(|v| v.is_finite());
        if !finite || !(self.k > 0.0) || !(self.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "parameter {self} requires finite values with K > 0 and sigma > 0"
            )));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.k, self.r, self.q, self.sigma]
    }
}

impl std::fmt::Display for ParameterVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(K={}, r={}, q={}, sigma={})", self.k, self.r, self.q, self.sigma)
    }
}

/// Box `[(1 − ε/2)c, (1 + ε/2)c]` around each center value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterBox {
    #[serde(rename = "K0")]
    pub k0: f64,
    pub r0: f64,
    pub q0: f64,
    pub sigma0: f64,
    pub eps: f64,
}

impl Default for ParameterBox {
    fn default() -> Self {
        Self {
            k0: 100.0,
            r0: 0.05,
            q0: 0.0015,
            sigma0: 0.5,
            eps: 0.1,
        }
    }
}

impl ParameterBox {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "box half-width factor must be >= 0, got {}",
                self.eps
            )));
        }
        let center = ParameterVector {
            k: self.k0,
            r: self.r0,
            q: self.q0,
            sigma: self.sigma0,
        };
        center.validate()?;
        // sigma and K must stay positive across the whole box
        if self.eps >= 2.0 {
            return Err(Error::InvalidArgument(
                "box half-width factor must be < 2 to keep K and sigma positive".into(),
            ));
        }
        Ok(())
    }

    /// Interval for one coordinate, ordered low to high.
    pub fn interval(&self, center: f64) -> (f64, f64) {
        let a = (1.0 - self.eps / 2.0) * center;
        let b = (1.0 + self.eps / 2.0) * center;
        (a.min(b), a.max(b))
    }

    /// `[K, r, q, σ]` intervals.
    pub fn intervals(&self) -> [(f64, f64); 4] {
        [
            self.interval(self.k0),
            self.interval(self.r0),
            self.interval(self.q0),
            self.interval(self.sigma0),
        ]
    }

    pub fn contains(&self, mu: &ParameterVector) -> bool {
        self.intervals()
            .iter()
            .zip(mu.as_array())
            .all(|(&(lo, hi), v)| v >= lo && v <= hi)
    }
}

/// Assembled parameter-independent FE operators.
///
/// The bilinear form splits as `a(·,·;μ) = σ²·a₁ + (r − q)·a₂ + r·a₃` and the
/// load as `f(·;μ) = Kq·f₁ − Kr·f₂`. Row `i` of each matrix is tested against
/// the hat function `φᵢ`, column `j` is the trial function `φⱼ`.
#[derive(Debug, Clone)]
pub struct AffineOperatorSet {
    pub x: Tridiagonal,
    pub mass: Tridiagonal,
    pub a1: Tridiagonal,
    pub a2: Tridiagonal,
    pub a3: Tridiagonal,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    chol_x: TridiagonalCholesky,
}

impl AffineOperatorSet {
    /// Assembles every operator on `mesh` with 2-point Gauss quadrature per cell.
    pub fn assemble(mesh: &Mesh1D) -> Result<Self> {
        let n = mesh.interior();
        let mut x = Tridiagonal::zeros(n);
        let mut mass = Tridiagonal::zeros(n);
        let mut a1 = Tridiagonal::zeros(n);
        let mut a2 = Tridiagonal::zeros(n);
        let mut f1 = vec![0.0; n];
        let mut f2 = vec![0.0; n];

        let gauss = 0.5 / 3f64.sqrt();
        let nodes = mesh.nodes();
        let s_f = mesh.s_f();
        for cell in 0..=n {
            let (left, right) = (nodes[cell], nodes[cell + 1]);
            let h = right - left;
            let mid = 0.5 * (left + right);
            // global node ids of the two local hats; interior dof = node - 1
            let dofs = [cell.checked_sub(1), (cell < n).then_some(cell)];
            let grads = [-1.0 / h, 1.0 / h];
            for s in [mid - gauss * h, mid + gauss * h] {
                let w = 0.5 * h;
                let values = [(right - s) / h, (s - left) / h];
                for test in 0..2 {
                    let Some(i) = dofs[test] else { continue };
                    f1[i] += w * (s / s_f) * values[test];
                    f2[i] += w * values[test];
                    for trial in 0..2 {
                        let Some(j) = dofs[trial] else { continue };
                        let uv = values[trial] * values[test];
                        let du_dv = grads[trial] * grads[test];
                        let du_v = grads[trial] * values[test];
                        mass.add(i, j, w * uv);
                        x.add(i, j, w * (s * s * du_dv + uv));
                        // ½⟨u', (s²v)'⟩ = ½⟨s²u', v'⟩ + ⟨s u', v⟩
                        a1.add(i, j, w * (0.5 * s * s * du_dv + s * du_v));
                        a2.add(i, j, -w * s * du_v);
                    }
                }
            }
        }
        // a₃ is the L² product; reuse the mass assembly verbatim
        let a3 = mass.clone();
        mass.cholesky()
            .map_err(|e| Error::Assembly(format!("mass matrix: {e}")))?;
        let chol_x = x
            .cholesky()
            .map_err(|e| Error::Assembly(format!("V-Gram matrix: {e}")))?;
        Ok(Self {
            x,
            mass,
            a1,
            a2,
            a3,
            f1,
            f2,
            chol_x,
        })
    }

    /// Builds an operator set from explicit matrices (synthetic tests).
    pub fn from_parts(
        x: Tridiagonal,
        mass: Tridiagonal,
        a1: Tridiagonal,
        a2: Tridiagonal,
        f1: Vec<f64>,
        f2: Vec<f64>,
    ) -> Result<Self> {
        let n = x.dim();
        if [mass.dim(), a1.dim(), a2.dim(), f1.len(), f2.len()]
            .iter()
            .any(|&d| d != n)
        {
            return Err(Error::InvalidArgument("operator dimensions differ".into()));
        }
        mass.cholesky()?;
        let chol_x = x.cholesky()?;
        let a3 = mass.clone();
        Ok(Self {
            x,
            mass,
            a1,
            a2,
            a3,
            f1,
            f2,
            chol_x,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn chol_x(&self) -> &TridiagonalCholesky {
        &self.chol_x
    }

    /// Affine coefficients `(σ², r − q, r)`.
    pub fn operator_coefficients(mu: &ParameterVector) -> [f64; 3] {
        [mu.sigma * mu.sigma, mu.r - mu.q, mu.r]
    }

    /// Load coefficients `(Kq, −Kr)`.
    pub fn load_coefficients(mu: &ParameterVector) -> [f64; 2] {
        [mu.k * mu.q, -mu.k * mu.r]
    }

    /// `A(μ) = σ²A₁ + (r − q)A₂ + rA₃`.
    pub fn operator(&self, mu: &ParameterVector) -> Tridiagonal {
        let [c1, c2, c3] = Self::operator_coefficients(mu);
        Tridiagonal::combine(&[(c1, &self.a1), (c2, &self.a2), (c3, &self.a3)])
    }

    /// `f(μ) = Kq·f₁ − Kr·f₂`.
    pub fn load(&self, mu: &ParameterVector) -> Vec<f64> {
        let [c1, c2] = Self::load_coefficients(mu);
        self.f1
            .iter()
            .zip(&self.f2)
            .map(|(a, b)| c1 * a + c2 * b)
            .collect()
    }

    pub fn v_inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.x.bilinear(u, v)
    }

    pub fn v_norm(&self, u: &[f64]) -> f64 {
        self.v_inner(u, u).max(0.0).sqrt()
    }

    /// `X⁻¹ η`.
    pub fn solve_x(&self, rhs: &[f64]) -> Vec<f64> {
        self.chol_x.solve(rhs)
    }
}

/// Nodal obstacle data for the put payoff at strike `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleData {
    /// `(K − s)₊`.
    pub psi: Vec<f64>,
    /// `K(1 − s/s_f)`, the lifting that carries the Dirichlet data.
    pub p0: Vec<f64>,
    /// `psi − p0`, the obstacle for the shifted price.
    pub psi_tilde: Vec<f64>,
}

impl ObstacleData {
    pub fn new(mesh: &Mesh1D, strike: f64) -> Result<Self> {
        if !(strike > 0.0) || !strike.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "strike must be positive, got {strike}"
            )));
        }
        let s_f = mesh.s_f();
        let psi: Vec<f64> = mesh
            .interior_nodes()
            .iter()
            .map(|&s| put_payoff(strike, s))
            .collect();
        let p0: Vec<f64> = mesh
            .interior_nodes()
            .iter()
            .map(|&s| lifting(strike, s, s_f))
            .collect();
        let psi_tilde = psi.iter().zip(&p0).map(|(a, b)| a - b).collect();
        Ok(Self { psi, p0, psi_tilde })
    }
}

pub fn put_payoff(strike: f64, s: f64) -> f64 {
    (strike - s).max(0.0)
}

pub fn lifting(strike: f64, s: f64, s_f: f64) -> f64 {
    strike * (1.0 - s / s_f)
}

/// Multiplier in the biorthogonal dual basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    pub coeffs: Vec<f64>,
}

impl DualVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn unit(dim: usize, index: usize) -> Self {
        let mut coeffs = vec![0.0; dim];
        coeffs[index] = 1.0;
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Duality pairing `η(v)`.
    pub fn action(&self, v: &[f64]) -> f64 {
        dot(&self.coeffs, v)
    }

    /// Membership in the discrete cone (all coefficients nonnegative).
    pub fn in_cone(&self) -> bool {
        self.coeffs.iter().all(|&c| c >= 0.0)
    }
}

/// `⟨η, ζ⟩_W = η · X⁻¹ζ`.
pub fn w_inner(eta: &DualVector, zeta: &DualVector, ops: &AffineOperatorSet) -> Result<f64> {
    if eta.dim() != ops.dim() || zeta.dim() != ops.dim() {
        return Err(Error::InvalidArgument(format!(
            "dual vectors of length {} and {} on a {}-dof space",
            eta.dim(),
            zeta.dim(),
            ops.dim()
        )));
    }
    Ok(dot(&eta.coeffs, &ops.solve_x(&zeta.coeffs)))
}

pub fn w_norm(eta: &DualVector, ops: &AffineOperatorSet) -> Result<f64> {
    Ok(w_inner(eta, eta, ops)?.max(0.0).sqrt())
}

/// Riesz representative `Bξ ∈ V` with `⟨Bξ, v⟩_V = ξ(v)` for all `v`.
pub fn riesz_supremizer(xi: &DualVector, ops: &AffineOperatorSet) -> Result<Vec<f64>> {
    if xi.dim() != ops.dim() {
        return Err(Error::InvalidArgument(format!(
            "dual vector of length {} on a {}-dof space",
            xi.dim(),
            ops.dim()
        )));
    }
    let b_xi = ops.solve_x(&xi.coeffs);
    let back = ops.x.matvec(&b_xi);
    let scale = crate::linalg::norm_inf(&xi.coeffs);
    let residual = back
        .iter()
        .zip(&xi.coeffs)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if !(residual <= 1e-10 * scale.max(f64::MIN_POSITIVE)) && scale > 0.0 {
        return Err(Error::Assembly(format!(
            "Riesz solve residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(b_xi)
}

/// Largest admissible condition number of a basis Gram matrix.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// V-orthogonal projection of `v` onto `span(basis)`.
///
/// Returns the expansion coefficients and the V-norm of the residual.
pub fn v_project(
    v: &[f64],
    basis: &[Vec<f64>],
    ops: &AffineOperatorSet,
) -> Result<(Vec<f64>, f64)> {
    if v.len() != ops.dim() || basis.iter().any(|b| b.len() != ops.dim()) {
        return Err(Error::InvalidArgument("projection dimension mismatch".into()));
    }
    if basis.is_empty() {
        return Ok((Vec::new(), ops.v_norm(v)));
    }
    let k = basis.len();
    let applied: Vec<Vec<f64>> = basis.iter().map(|b| ops.x.matvec(b)).collect();
    let gram = DMatrix::from_fn(k, k, |i, j| dot(&basis[i], &applied[j]));
    let gram = 0.5 * (&gram + gram.transpose());
    let condition = symmetric_condition(&gram);
    if !(condition < GRAM_CONDITION_LIMIT) {
        return Err(Error::IllConditionedBasis { condition });
    }
    let rhs = DVector::from_iterator(k, applied.iter().map(|a| dot(a, v)));
    let coeffs = gram
        .cholesky()
        .ok_or(Error::IllConditionedBasis {
            condition: f64::INFINITY,
        })?
        .solve(&rhs);
    let mut residual = v.to_vec();
    for (c, b) in coeffs.iter().zip(basis) {
        for (r, bi) in residual.iter_mut().zip(b) {
            *r -= c * bi;
        }
    }
    Ok((coeffs.as_slice().to_vec(), ops.v_norm(&residual)))
}
