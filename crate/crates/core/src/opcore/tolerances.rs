/// Numerical thresholds shared by every module.
///
/// All values are relative to the scale of the operator they are applied to
/// unless the field documentation says otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Eigenvalue and residual comparisons.
    pub eig_tol: f64,
    /// Singular values above `svd_gap_cap * sigma_max` are never treated as zero.
    pub svd_gap_cap: f64,
    /// Fallback relative rank cutoff used when no decisive gap exists.
    pub rank_rel_tol: f64,
    /// Minimum distance of a level from the spectrum before projecting.
    pub proj_gap_tol: f64,
    /// Allowed distance of a trace from the nearest integer.
    pub integer_residual_tol: f64,
    /// Absolute eigenvalue size at which a crossing counts as located.
    pub crossing_tol: f64,
    /// Allowed Hermitian residual of a stored operator (absolute, scaled by max(1, |A|)).
    pub hermitian_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            svd_gap_cap: 1e-6,
            rank_rel_tol: 1e-8,
            proj_gap_tol: 1e-8,
            integer_residual_tol: 1e-6,
            crossing_tol: 1e-10,
            hermitian_tol: 1e-12,
        }
    }
}
