use faer::{c64, Mat, MatRef, Side};

use super::linalg::{self, CMat};
use crate::error::{Error, Result};

/// A square complex matrix that is Hermitian up to rounding.
///
/// Construction symmetrizes the input as `(A + A*) / 2` and records how far
/// the input was from Hermitian; it never rejects a finite square input.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    entries: CMat,
    input_residual: f64,
}

/// Spectral decomposition `H = V diag(values) V*` with nondecreasing values.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianOperator {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!("operator must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if !linalg::is_finite(m.as_ref()) {
            return Err(Error::InvalidInput("operator has non-finite entries".into()));
        }
        let n = m.nrows();
        let scale = linalg::frobenius(m.as_ref()).max(1.0);
        let mut asym = 0.0f64;
        let sym = Mat::from_fn(n, n, |i, j| {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            asym = asym.max((a - b).norm());
            if i == j {
                c64::new(a.re, 0.0)
            } else {
                (a + b) * 0.5
            }
        });
        Ok(Self { entries: sym, input_residual: asym / scale })
    }

    pub fn from_ref(m: MatRef<'_, c64>) -> Result<Self> {
        Self::new(m.to_owned())
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> c64) -> Result<Self> {
        Self::new(Mat::from_fn(n, n, f))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        Self { entries: linalg::real_diagonal(d), input_residual: 0.0 }
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: linalg::zeros(n, n), input_residual: 0.0 }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    pub fn scalar(n: usize, s: f64) -> Self {
        Self::from_real_diagonal(&vec![s; n])
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }

    /// Relative distance of the *input* from Hermitian, before symmetrization.
    pub fn input_residual(&self) -> f64 {
        self.input_residual
    }

    /// `|A - A*|_max / max(1, |A|_F)` of the stored matrix.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst / linalg::frobenius(self.entries()).max(1.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { entries: linalg::scale(self.entries(), a), input_residual: self.input_residual }
    }

    pub fn shifted(&self, s: f64) -> Self {
        Self { entries: linalg::shift(self.entries(), c64::new(s, 0.0)), input_residual: self.input_residual }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { entries: &self.entries + &other.entries, input_residual: 0.0 })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { entries: &self.entries - &other.entries, input_residual: 0.0 })
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim();
        Self::new(Mat::from_fn(n, n, |i, j| self.entries[(i, j)] * a + other.entries[(i, j)] * b))
    }

    /// `U H U*`.
    pub fn conjugated(&self, u: MatRef<'_, c64>) -> Result<Self> {
        if u.nrows() != u.ncols() || u.nrows() != self.dim() {
            return Err(Error::InvalidInput("conjugating matrix has the wrong shape".into()));
        }
        Self::new(u * &self.entries * u.adjoint())
    }

    pub fn eigh(&self) -> Result<Eigh> {
        let n = self.dim();
        if n == 0 {
            return Ok(Eigh { values: Vec::new(), vectors: linalg::zeros(0, 0) });
        }
        let evd = self
            .entries
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let s = evd.S().column_vector();
        let values = (0..n).map(|i| s[i].re).collect();
        Ok(Eigh { values, vectors: evd.U().to_owned() })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        self.entries
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigenvalue computation failed: {e:?}")))
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    pub fn min_abs_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidInput(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn count_positive(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// `V diag(f(values)) V*` for a complex-valued `f`.
    pub fn reconstruct_complex(&self, f: impl Fn(f64) -> c64) -> CMat {
        let n = self.dim();
        let d: Vec<c64> = self.values.iter().map(|&v| f(v)).collect();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * d[j]);
        &scaled * self.vectors.adjoint()
    }

    /// `V diag(f(values)) V*` for a real-valued `f`; the result is Hermitian.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let m = self.reconstruct_complex(|v| c64::new(f(v), 0.0));
        HermitianOperator::new(m).expect("reconstruction of a finite spectrum is finite")
    }

    /// Orthonormal basis (as columns) of the eigenvectors whose eigenvalue satisfies `keep`.
    pub fn basis_where(&self, keep: impl Fn(f64) -> bool) -> CMat {
        let cols: Vec<usize> = (0..self.dim()).filter(|&j| keep(self.values[j])).collect();
        Mat::from_fn(self.dim(), cols.len(), |i, c| self.vectors[(i, cols[c])])
    }
}
