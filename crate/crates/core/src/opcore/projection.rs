use faer::{c64, Mat, MatRef};

use super::hermitian::HermitianOperator;
use super::linalg::{self, CMat};
use crate::error::{Error, Result};

const PROJECTION_TOL: f64 = 1e-10;

/// An orthogonal projection: `P = P*` and `P^2 = P` within 1e-10.
#[derive(Clone, Debug)]
pub struct Projection {
    entries: CMat,
    rank: usize,
}

impl Projection {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!("projection must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if !linalg::is_finite(m.as_ref()) {
            return Err(Error::InvalidInput("projection has non-finite entries".into()));
        }
        let herm = linalg::max_abs_diff(m.as_ref(), m.adjoint().to_owned().as_ref());
        let sq = &m * &m;
        let idem = linalg::frobenius((&sq - &m).as_ref());
        if herm > PROJECTION_TOL || idem > PROJECTION_TOL {
            return Err(Error::InvalidInput(format!(
                "not an orthogonal projection: |P - P*| = {herm:.2e}, |P^2 - P| = {idem:.2e}"
            )));
        }
        let rank = HermitianOperator::from_ref(m.as_ref())?.eigenvalues()?.iter().filter(|&&v| v > 0.5).count();
        Ok(Self { entries: m, rank })
    }

    /// Projection `B B*` onto the span of orthonormal columns `B`.
    pub fn from_orthonormal_columns(b: MatRef<'_, c64>) -> Result<Self> {
        let gram = b.adjoint() * b;
        let dev = linalg::max_abs_diff(gram.as_ref(), linalg::identity(b.ncols()).as_ref());
        if dev > 1e-10 {
            return Err(Error::InvalidInput(format!("columns are not orthonormal (deviation {dev:.2e})")));
        }
        let m = b * b.adjoint();
        let n = m.nrows();
        // Exact Hermitian symmetrization keeps the 1e-10 check robust for large ranks.
        let m = Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        Ok(Self { entries: m, rank: b.ncols() })
    }

    pub fn zero(n: usize) -> Self {
        Self { entries: linalg::zeros(n, n), rank: 0 }
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: linalg::identity(n), rank: n }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entries(&self) -> MatRef<'_, c64> {
        self.entries.as_ref()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).sum()
    }

    pub fn complement(&self) -> Self {
        let n = self.dim();
        let m = Mat::from_fn(n, n, |i, j| {
            let id = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
            id - self.entries[(i, j)]
        });
        Self { entries: m, rank: n - self.rank }
    }

    /// Orthonormal basis of the range, as columns.
    pub fn range_basis(&self) -> Result<CMat> {
        let eig = HermitianOperator::from_ref(self.entries())?.eigh()?;
        Ok(eig.basis_where(|v| v > 0.5))
    }

    /// Operator norm of `self - other`.
    pub fn distance(&self, other: &Projection) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidInput("projection dimensions differ".into()));
        }
        HermitianOperator::new(&self.entries - &other.entries)?.spectral_norm()
    }

    /// `U P U*` for unitary `U`.
    pub fn conjugated(&self, u: MatRef<'_, c64>) -> Result<Self> {
        let m = u * &self.entries * u.adjoint();
        let n = m.nrows();
        let m = Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        Self::new(m)
    }
}
