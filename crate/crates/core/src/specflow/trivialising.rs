use std::sync::Arc;

use super::path::PotentialPath;
use crate::error::{Error, Result};
use crate::opcore::{positive_projection, HermitianOperator, Tolerances};
use crate::relindex::rel_index_of;

/// A family `t -> B(t)` on an interval such that `S(t) + B(t)` is invertible there.
#[derive(Clone)]
pub struct TrivialisingFamily {
    pub interval: (f64, f64),
    rule: Arc<dyn Fn(f64) -> Result<HermitianOperator> + Send + Sync>,
}

impl std::fmt::Debug for TrivialisingFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrivialisingFamily").field("interval", &self.interval).finish()
    }
}

impl TrivialisingFamily {
    pub fn new(interval: (f64, f64), rule: impl Fn(f64) -> Result<HermitianOperator> + Send + Sync + 'static) -> Self {
        Self { interval, rule: Arc::new(rule) }
    }

    pub fn at(&self, t: f64) -> Result<HermitianOperator> {
        (self.rule)(t)
    }

    /// Smallest `|eigenvalue|` of `S(t) + B(t)` over the path grid points in
    /// the interval; fails if it drops below `proj_gap_tol`.
    pub fn verify(&self, path: &PotentialPath, tol: &Tolerances) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for &t in path.grid().iter().filter(|&&t| self.interval.0 <= t && t <= self.interval.1) {
            let g = path.sample(t)?.try_add(&self.at(t)?)?.min_abs_eigenvalue()?;
            worst = worst.min(g);
        }
        if worst < tol.proj_gap_tol {
            return Err(Error::NotInvertible { min_abs_eig: worst, tol: tol.proj_gap_tol });
        }
        Ok(worst)
    }
}

/// `B(t) = S(t_0) - S(t)`, so that `S(t) + B(t) = S(t_0)` for all `t`.
pub fn make_trivialising_endpoint(path: &PotentialPath, tol: &Tolerances) -> Result<TrivialisingFamily> {
    let s0 = path.sample(path.start())?;
    let g = s0.min_abs_eigenvalue()?;
    if g < tol.proj_gap_tol {
        return Err(Error::NotInvertible { min_abs_eig: g, tol: tol.proj_gap_tol });
    }
    let p = path.clone();
    Ok(TrivialisingFamily::new((path.start(), path.end()), move |t| s0.try_sub(&p.sample(t)?)))
}

/// `B = delta (2P - 1)` with `P` the spectral projection of `H` onto `(-delta, inf)`.
///
/// Then `|B| = delta` and `H + B` has no spectrum in `(-delta/2, delta/2)`
/// unless `H` has eigenvalues in `(-delta, -delta/2]`, in which case the
/// construction fails with `ShiftFailure`.
pub fn make_trivialising_gapshift(h: &HermitianOperator, delta: f64) -> Result<HermitianOperator> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidInput(format!("gap shift needs delta > 0, got {delta}")));
    }
    let eig = h.eigh()?;
    if let Some(bad) = eig.values.iter().find(|&&v| v > -delta && v + delta < 0.5 * delta) {
        return Err(Error::ShiftFailure(format!("eigenvalue {bad:.6e} lies in (-delta, -delta/2] for delta = {delta}")));
    }
    Ok(eig.reconstruct(|v| if v > -delta { delta } else { -delta }))
}

/// `ind(D, B0, B1) = rel-ind(P_+(D + B1), P_+(D + B0))`.
pub fn ind_triple(d: &HermitianOperator, b0: &HermitianOperator, b1: &HermitianOperator, tol: &Tolerances) -> Result<i64> {
    let p1 = positive_projection(&d.try_add(b1)?, tol.proj_gap_tol)?;
    let p0 = positive_projection(&d.try_add(b0)?, tol.proj_gap_tol)?;
    rel_index_of(&p1, &p0, tol)
}
