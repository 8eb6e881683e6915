//! Relative index of pairs of orthogonal projections.
//!
//! For projections `P`, `Q` with `P - Q` trace class (always the case in
//! finite dimensions) the relative index is `tr(P - Q)`, which equals the
//! Fredholm index of `Q: Ran P -> Ran Q`. Both formulas are implemented so
//! that one can check the other.

use crate::error::{Error, Result};
use crate::opcore::{linalg, null_space, Projection, Tolerances};

/// Two projections on the same space.
#[derive(Clone, Debug)]
pub struct ProjectionPair {
    pub p: Projection,
    pub q: Projection,
    /// `|P - Q|` in operator norm.
    pub diff_norm: f64,
}

impl ProjectionPair {
    pub fn new(p: Projection, q: Projection) -> Result<Self> {
        if p.dim() != q.dim() {
            return Err(Error::InvalidInput(format!("projection dimensions differ: {} vs {}", p.dim(), q.dim())));
        }
        let diff_norm = p.distance(&q)?;
        Ok(Self { p, q, diff_norm })
    }
}

/// `rel-ind(P, Q) = tr(P - Q)`, rounded.
///
/// Fails with `NonIntegerTrace` when the trace is not within
/// `integer_residual_tol` of an integer or disagrees with the difference of
/// eigenvalue ranks.
pub fn rel_index(pair: &ProjectionPair, tol: &Tolerances) -> Result<i64> {
    rel_index_of(&pair.p, &pair.q, tol)
}

pub fn rel_index_of(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<i64> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidInput(format!("projection dimensions differ: {} vs {}", p.dim(), q.dim())));
    }
    let trace = p.trace() - q.trace();
    let rounded = trace.round();
    if (trace - rounded).abs() > tol.integer_residual_tol {
        return Err(Error::NonIntegerTrace { trace });
    }
    let value = rounded as i64;
    if value != p.rank() as i64 - q.rank() as i64 {
        return Err(Error::NonIntegerTrace { trace });
    }
    Ok(value)
}

/// `tr((P - Q)^{2m+1})`.
///
/// When `P - Q` has spectrum in `{-1, 0, 1}` this is independent of `m` and
/// equals the relative index; it serves as a cross-check of the trace formula.
pub fn rel_index_odd_power(pair: &ProjectionPair, m: u32) -> Result<f64> {
    let d = &pair.p.entries().to_owned() - &pair.q.entries().to_owned();
    let mut acc = d.clone();
    let d2 = &d * &d;
    for _ in 0..m {
        acc = &acc * &d2;
    }
    Ok((0..acc.nrows()).map(|i| acc[(i, i)].re).sum())
}

/// Componentwise relative index of a direct sum of pairs.
pub fn rel_index_fibered(pairs: &[ProjectionPair], tol: &Tolerances) -> Result<Vec<i64>> {
    pairs.iter().map(|pair| rel_index(pair, tol)).collect()
}

/// Index of `Q` restricted to a map `Ran P -> Ran Q`, computed as
/// `dim ker - dim coker` from numerical kernels.
pub fn restricted_index(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<i64> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidInput("projection dimensions differ".into()));
    }
    let bp = p.range_basis()?;
    let bq = q.range_basis()?;
    let m = bq.adjoint() * &bp;
    let ker = null_space(m.as_ref(), tol)?.dim;
    let coker = null_space(linalg::adjoint(m.as_ref()).as_ref(), tol)?.dim;
    Ok(ker as i64 - coker as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdditivityReport {
    pub pq: i64,
    pub qr: i64,
    pub pr: i64,
    pub holds: bool,
}

/// Checks `rel-ind(P, R) = rel-ind(P, Q) + rel-ind(Q, R)`.
pub fn check_additivity(p: &Projection, q: &Projection, r: &Projection, tol: &Tolerances) -> Result<AdditivityReport> {
    let pq = rel_index_of(p, q, tol)?;
    let qr = rel_index_of(q, r, tol)?;
    let pr = rel_index_of(p, r, tol)?;
    Ok(AdditivityReport { pq, qr, pr, holds: pr == pq + qr })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyReport {
    /// `rel-ind(P_i, Q_i)` at every sample.
    pub values: Vec<i64>,
    pub constant: bool,
    /// `rel-ind(P_i, P_0)` at every sample; zero along a norm-continuous path.
    pub drift: Vec<i64>,
    pub drift_free: bool,
}

/// Largest step allowed between consecutive samples of a projection path.
/// Two projections closer than 1 in norm have equal rank.
const MAX_STEP: f64 = 1.0 - 1e-6;

/// Evaluates the relative index along sampled paths `P_i`, `Q_i`.
pub fn homotopy_constancy(p_path: &[Projection], q_path: &[Projection], tol: &Tolerances) -> Result<HomotopyReport> {
    if p_path.len() != q_path.len() || p_path.is_empty() {
        return Err(Error::InvalidInput("paths must be nonempty and of equal length".into()));
    }
    for path in [p_path, q_path] {
        for (step, w) in path.windows(2).enumerate() {
            let jump = w[0].distance(&w[1])?;
            if jump >= MAX_STEP {
                return Err(Error::PathTooCoarse { step, jump });
            }
        }
    }
    let values = p_path.iter().zip(q_path).map(|(p, q)| rel_index_of(p, q, tol)).collect::<Result<Vec<_>>>()?;
    let drift = p_path.iter().map(|p| rel_index_of(p, &p_path[0], tol)).collect::<Result<Vec<_>>>()?;
    Ok(HomotopyReport {
        constant: values.iter().all(|&v| v == values[0]),
        drift_free: drift.iter().all(|&v| v == 0),
        values,
        drift,
    })
}
