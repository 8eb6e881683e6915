use faer::{c64, Mat};

use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::opcore::{linalg, HermitianOperator};
use crate::specflow::PotentialPath;

/// Closed-form kernel counts for a commuting family.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalOracle {
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
    /// Eigenvalue of each common eigenvector at `-L` and `+L`.
    pub branch_ends: Vec<(f64, f64)>,
}

/// Counts kernel and cokernel dimensions of `D` for a simultaneously
/// diagonalizable path.
///
/// In a common eigenbasis the kernel equation decouples into
/// `psi' = -lambda s_i(t) psi`, which has an `L^2` solution iff
/// `s_i(-L) < 0 < s_i(L)`; the cokernel equation has one iff
/// `s_i(-L) > 0 > s_i(L)`.
pub fn kernel_oracle_diagonal(path: &PotentialPath, grid: &GridSpec) -> Result<DiagonalOracle> {
    let k = path.fiber_dim();
    let mut times: Vec<f64> = path.grid().to_vec();
    times.extend([-grid.half_length, grid.half_length]);
    let samples: Vec<HermitianOperator> = times.iter().map(|&t| path.sample(t)).collect::<Result<_>>()?;
    // A generic combination of the samples shares their common eigenbasis.
    let mut combo = Mat::<c64>::zeros(k, k);
    for (i, s) in samples.iter().enumerate() {
        let w = 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract();
        combo += linalg::scale(s.entries(), w);
    }
    let basis = HermitianOperator::new(combo)?.eigh()?.vectors;
    let mut residual = 0.0f64;
    for s in &samples {
        let d = basis.adjoint() * s.entries() * &basis;
        let scale = s.spectral_norm()?.max(1.0);
        for j in 0..k {
            for i in 0..k {
                if i != j {
                    residual = residual.max(d[(i, j)].norm() / scale);
                }
            }
        }
    }
    if residual > 1e-8 {
        return Err(Error::NotDiagonalizable { residual });
    }
    let ends = |t: f64| -> Result<Vec<f64>> {
        let d = basis.adjoint() * path.sample(t)?.entries() * &basis;
        Ok((0..k).map(|i| d[(i, i)].re).collect())
    };
    let (left, right) = (ends(-grid.half_length)?, ends(grid.half_length)?);
    let branch_ends: Vec<(f64, f64)> = left.into_iter().zip(right).collect();
    let dim_ker = branch_ends.iter().filter(|&&(a, b)| a < 0.0 && b > 0.0).count();
    let dim_coker = branch_ends.iter().filter(|&&(a, b)| a > 0.0 && b < 0.0).count();
    Ok(DiagonalOracle { dim_ker, dim_coker, index: dim_ker as i64 - dim_coker as i64, branch_ends })
}

/// Relative `l^2` distance between discrete node values and a reference
/// profile, after the optimal complex rescaling of the discrete values.
pub fn profile_error(values: &[c64], nodes: &[f64], reference: impl Fn(f64) -> f64) -> f64 {
    let r: Vec<f64> = nodes.iter().map(|&t| reference(t)).collect();
    let vv: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    let vr: c64 = values.iter().zip(&r).map(|(v, &x)| v.conj() * x).sum();
    let alpha = vr / vv;
    let num: f64 = values.iter().zip(&r).map(|(v, &x)| (*v * alpha - x).norm_sqr()).sum();
    let den: f64 = r.iter().map(|x| x * x).sum();
    (num / den).sqrt()
}
