use faer::{c64, Mat, MatRef};

use super::linalg::{self, CMat};
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// Outcome of a numerical rank decision on a list of singular values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    /// Singular values at or below this value were treated as zero.
    pub threshold: f64,
    /// Ratio between the last kept and first dropped singular value, or a
    /// confidence ratio `sigma_min / (rank_rel_tol * sigma_max)` when nothing
    /// was dropped. Infinite when the split is exact.
    pub gap_ratio: f64,
}

/// Minimum ratio across the chosen gap for a rank decision to be accepted.
pub const MIN_GAP_RATIO: f64 = 10.0;

/// Decides the numerical rank of a matrix from its singular values
/// (given in nonincreasing order).
///
/// The cut is placed at the largest consecutive ratio among singular values
/// below `svd_gap_cap * sigma_max`; when that ratio is below
/// [`MIN_GAP_RATIO`] the decision is reported as ambiguous, together with
/// the fixed-threshold fallback.
pub fn decide_rank(sv: &[f64], tol: &Tolerances) -> Result<RankDecision> {
    let Some(&smax) = sv.first() else {
        return Ok(RankDecision { rank: 0, threshold: 0.0, gap_ratio: f64::INFINITY });
    };
    if smax == 0.0 {
        return Ok(RankDecision { rank: 0, threshold: 0.0, gap_ratio: f64::INFINITY });
    }
    let cap = tol.svd_gap_cap * smax;
    let fallback_threshold = tol.rank_rel_tol * smax;
    let Some(first_small) = sv.iter().position(|&s| s < cap) else {
        let smin = *sv.last().unwrap();
        return Ok(RankDecision { rank: sv.len(), threshold: fallback_threshold, gap_ratio: smin / fallback_threshold });
    };
    let mut best = (first_small, 0.0f64);
    for k in first_small..sv.len() {
        let ratio = if sv[k] == 0.0 { f64::INFINITY } else { sv[k - 1] / sv[k] };
        if ratio > best.1 {
            best = (k, ratio);
        }
    }
    let (rank, gap_ratio) = best;
    if gap_ratio < MIN_GAP_RATIO {
        let fallback = sv.iter().filter(|&&s| s > fallback_threshold).count();
        return Err(Error::AmbiguousRank { candidates: (rank, fallback), gap_ratio });
    }
    let threshold = if sv[rank] == 0.0 { 0.0 } else { (sv[rank - 1] * sv[rank]).sqrt() };
    Ok(RankDecision { rank, threshold, gap_ratio })
}

/// Numerical kernel of a (possibly rectangular) matrix.
#[derive(Clone, Debug)]
pub struct NullSpace {
    /// Orthonormal kernel basis, as columns.
    pub basis: CMat,
    pub dim: usize,
    /// All `min(rows, cols)` singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Kernel dimension forced by the shape alone (`cols - rows` for wide matrices).
    pub structural: usize,
    pub decision: RankDecision,
}

pub fn null_space(m: MatRef<'_, c64>, tol: &Tolerances) -> Result<NullSpace> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if !linalg::is_finite(m) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if cols == 0 {
        let decision = RankDecision { rank: 0, threshold: 0.0, gap_ratio: f64::INFINITY };
        return Ok(NullSpace { basis: linalg::zeros(0, 0), dim: 0, singular_values: Vec::new(), structural: 0, decision });
    }
    if rows == 0 {
        let decision = RankDecision { rank: 0, threshold: 0.0, gap_ratio: f64::INFINITY };
        return Ok(NullSpace { basis: linalg::identity(cols), dim: cols, singular_values: Vec::new(), structural: cols, decision });
    }
    // Pad wide matrices with zero rows so that the SVD yields a full right basis.
    let padded;
    let a = if rows < cols {
        padded = Mat::from_fn(cols, cols, |i, j| if i < rows { m[(i, j)] } else { c64::new(0.0, 0.0) });
        padded.as_ref()
    } else {
        m
    };
    let svd = a.svd().map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let singular_values: Vec<f64> = (0..rows.min(cols)).map(|i| s[i].re).collect();
    let decision = decide_rank(&singular_values, tol).map_err(|e| match e {
        Error::AmbiguousRank { candidates: (a, b), gap_ratio } => {
            Error::AmbiguousRank { candidates: (cols - a, cols - b), gap_ratio }
        }
        other => other,
    })?;
    let v = svd.V();
    let dim = cols - decision.rank;
    let basis = Mat::from_fn(cols, dim, |i, j| v[(i, decision.rank + j)]);
    Ok(NullSpace { basis, dim, singular_values, structural: cols.saturating_sub(rows), decision })
}
