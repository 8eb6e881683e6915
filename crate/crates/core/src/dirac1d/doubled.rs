use faer::{c64, Mat};

use super::assemble::{BoundaryCondition, DiscretizedDiracSchroedinger};
use crate::error::{Error, Result};
use crate::opcore::{linalg, CMat, HermitianOperator};

/// The self-adjoint doubling `[[0, D*], [D, 0]]` of a square discretization,
/// graded by `diag(1, -1)`.
#[derive(Clone, Debug)]
pub struct DoubledOperator {
    pub matrix: HermitianOperator,
    pub half: usize,
}

impl DoubledOperator {
    pub fn new(op: &DiscretizedDiracSchroedinger) -> Result<Self> {
        if op.bc != BoundaryCondition::Dirichlet || op.rows() != op.cols() {
            return Err(Error::InvalidInput("doubling needs the square Dirichlet discretization".into()));
        }
        let n = op.rows();
        let d = &op.matrix;
        let m = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, false) => d[(j - n, i)].conj(),
            (false, true) => d[(i - n, j)],
            _ => c64::new(0.0, 0.0),
        });
        Ok(Self { matrix: HermitianOperator::new(m)?, half: n })
    }

    pub fn grading(&self) -> CMat {
        let n = self.half;
        linalg::real_diagonal(&(0..2 * n).map(|i| if i < n { 1.0 } else { -1.0 }).collect::<Vec<_>>())
    }

    /// `|G D + D G|` in operator norm; zero for an odd operator.
    pub fn anticommutator_norm(&self) -> f64 {
        let g = self.grading();
        let d = self.matrix.entries();
        let ac = &g * d + d * &g;
        linalg::opnorm(ac.as_ref())
    }

    /// Largest distance between the sorted spectrum and its negation.
    pub fn spectrum_symmetry_residual(&self) -> Result<f64> {
        let ev = self.matrix.eigenvalues()?;
        let n = ev.len();
        Ok((0..n).map(|i| (ev[i] + ev[n - 1 - i]).abs()).fold(0.0, f64::max))
    }
}
