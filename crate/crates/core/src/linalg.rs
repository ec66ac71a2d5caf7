//! Tridiagonal storage and direct solvers.
//!
//! Every full-order operator on a 1D P1 mesh has a three-point stencil, so the
//! truth solver never forms dense H×H matrices. Symmetric positive definite
//! systems use an LDLᵀ-free Cholesky; general systems use LU with partial
//! pivoting (the `gttrf`/`gttrs` scheme, which adds one extra superdiagonal).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// Subdiagonal, `lower[i] = A[i+1][i]`.
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    /// Superdiagonal, `upper[i] = A[i][i+1]`.
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        let off = n.saturating_sub(1);
        Self {
            lower: vec![0.0; off],
            diag: vec![0.0; n],
            upper: vec![0.0; off],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n);
        t.diag.iter_mut().for_each(|d| *d = 1.0);
        t
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.upper[i]
        } else if i == j + 1 {
            self.lower[j]
        } else {
            0.0
        }
    }

    /// Adds `value` to entry `(i, j)`. Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        if i == j {
            self.diag[i] += value;
        } else if j == i + 1 {
            self.upper[i] += value;
        } else if i == j + 1 {
            self.lower[j] += value;
        } else {
            panic!("entry ({i}, {j}) is outside the tridiagonal band");
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.upper[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    /// `Σ cₖ Aₖ` for operators of equal dimension.
    pub fn combine(terms: &[(f64, &Tridiagonal)]) -> Tridiagonal {
        let n = terms.first().map_or(0, |(_, t)| t.dim());
        let mut out = Tridiagonal::zeros(n);
        for (c, t) in terms {
            assert_eq!(t.dim(), n);
            for (o, v) in out.diag.iter_mut().zip(&t.diag) {
                *o += c * v;
            }
            for (o, v) in out.lower.iter_mut().zip(&t.lower) {
                *o += c * v;
            }
            for (o, v) in out.upper.iter_mut().zip(&t.upper) {
                *o += c * v;
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower == self.upper
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// `Bᵀ A B` for a dense `B` with `dim()` rows.
    pub fn congruence(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let applied = self.apply_columns(basis);
        basis.transpose() * applied
    }

    /// `A B` column by column.
    pub fn apply_columns(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(basis.nrows(), self.dim());
        let mut out = DMatrix::zeros(basis.nrows(), basis.ncols());
        for (j, col) in basis.column_iter().enumerate() {
            let y = self.matvec(col.as_slice());
            out.set_column(j, &DVector::from_vec(y));
        }
        out
    }

    /// Cholesky factorization `A = L Lᵀ`; fails unless every pivot is positive.
    pub fn cholesky(&self) -> Result<TridiagonalCholesky> {
        if !self.is_symmetric() {
            return Err(Error::Assembly("Cholesky of a nonsymmetric matrix".into()));
        }
        let n = self.dim();
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut pivot = self.diag[i];
            if i > 0 {
                pivot -= sub[i - 1] * sub[i - 1];
            }
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::Assembly(format!(
                    "non-positive Cholesky pivot {pivot:e} at row {i}"
                )));
            }
            diag[i] = pivot.sqrt();
            if i + 1 < n {
                sub[i] = self.lower[i] / diag[i];
            }
        }
        Ok(TridiagonalCholesky { diag, sub })
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<TridiagonalLu> {
        let n = self.dim();
        let mut dl = self.lower.clone();
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let scale = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (i, &pivot) in d.iter().enumerate() {
            if !pivot.is_finite() || pivot.abs() <= f64::EPSILON * scale * n as f64 {
                return Err(Error::NumericalBreakdown(format!(
                    "singular tridiagonal system (pivot {pivot:e} at row {i})"
                )));
            }
        }
        Ok(TridiagonalLu {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalCholesky {
    diag: Vec<f64>,
    sub: Vec<f64>,
}

impl TridiagonalCholesky {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.diag
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        // L y = b
        for i in 0..n {
            if i > 0 {
                x[i] -= self.sub[i - 1] * x[i - 1];
            }
            x[i] /= self.diag[i];
        }
        // Lᵀ x = y
        for i in (0..n).rev() {
            if i + 1 < n {
                x[i] -= self.sub[i] * x[i + 1];
            }
            x[i] /= self.diag[i];
        }
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        assert_eq!(b.len(), n);
        if n == 0 {
            return;
        }
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Spectral condition number of a symmetric matrix (ratio of extreme
/// eigenvalue magnitudes). Returns infinity for singular input.
pub fn symmetric_condition(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = m.clone().symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| {
            (lo.min(v.abs()), hi.max(v.abs()))
        });
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}
