use faer::c64;

use super::hermitian::HermitianOperator;
use super::linalg::CMat;
use super::projection::Projection;
use crate::error::{Error, Result};

/// `f(H)` through the eigendecomposition of `H`.
///
/// Fails with `DomainError` if `f` is not finite at some eigenvalue.
pub fn apply_function(h: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let eig = h.eigh()?;
    if let Some(bad) = eig.values.iter().find(|&&v| !f(v).is_finite()) {
        return Err(Error::DomainError(format!("function is not finite at eigenvalue {bad:.6e}")));
    }
    Ok(eig.reconstruct(f))
}

/// `f(H)` for a complex-valued `f`; the result is normal but not Hermitian.
pub fn apply_complex_function(h: &HermitianOperator, f: impl Fn(f64) -> c64) -> Result<CMat> {
    Ok(h.eigh()?.reconstruct_complex(f))
}

/// The bounded transform `F_H = H (1 + H^2)^{-1/2}`.
pub fn bounded_transform(h: &HermitianOperator) -> Result<HermitianOperator> {
    apply_function(h, |x| x / (1.0 + x * x).sqrt())
}

/// `(1 + H^2)^{-1/2}`.
pub fn inv_sqrt_one_plus_square(h: &HermitianOperator) -> Result<HermitianOperator> {
    apply_function(h, |x| 1.0 / (1.0 + x * x).sqrt())
}

/// Spectral projection onto eigenvalues above `level`.
///
/// Fails with `NotInvertible` when some eigenvalue lies within `gap_tol` of
/// the level, because the projection is then not stable under perturbation.
pub fn spectral_projection_above(h: &HermitianOperator, level: f64, gap_tol: f64) -> Result<Projection> {
    let eig = h.eigh()?;
    let dist = eig.values.iter().fold(f64::INFINITY, |m, v| m.min((v - level).abs()));
    if dist < gap_tol {
        return Err(Error::NotInvertible { min_abs_eig: dist, tol: gap_tol });
    }
    Projection::from_orthonormal_columns(eig.basis_where(|v| v > level).as_ref())
}

/// `P_+(H)`, the projection onto the positive spectral subspace.
pub fn positive_projection(h: &HermitianOperator, gap_tol: f64) -> Result<Projection> {
    spectral_projection_above(h, 0.0, gap_tol)
}

/// `H^{-1/2}` for positive definite `H`.
pub fn inv_sqrt_positive(h: &HermitianOperator, min_eig: f64) -> Result<HermitianOperator> {
    let eig = h.eigh()?;
    let lo = eig.values.first().copied().unwrap_or(f64::INFINITY);
    if lo < min_eig {
        return Err(Error::InvalidInput(format!("operator is not positive definite (min eigenvalue {lo:.3e})")));
    }
    Ok(eig.reconstruct(|x| 1.0 / x.sqrt()))
}

/// `H^{1/2}` for positive definite `H`.
pub fn sqrt_positive(h: &HermitianOperator, min_eig: f64) -> Result<HermitianOperator> {
    let eig = h.eigh()?;
    let lo = eig.values.first().copied().unwrap_or(f64::INFINITY);
    if lo < min_eig {
        return Err(Error::InvalidInput(format!("operator is not positive definite (min eigenvalue {lo:.3e})")));
    }
    Ok(eig.reconstruct(f64::sqrt))
}
