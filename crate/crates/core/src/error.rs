use thiserror::Error;

/// Every failure mode reported by the algorithms in this crate.
///
/// Precondition failures (`HypothesisUnmet`, `NotInvertible`, ...) are
/// distinguished from `TheoremViolation`, which means a checked identity
/// did not hold on inputs that satisfied all hypotheses.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("operator not invertible: min |eigenvalue| = {min_abs_eig:.3e} below tolerance {tol:.3e}")]
    NotInvertible { min_abs_eig: f64, tol: f64 },
    #[error("ambiguous numerical rank: candidates {candidates:?}, gap ratio {gap_ratio:.3e}")]
    /// Gap-based and fixed-threshold candidates: ranks from `decide_rank`,
    /// kernel dimensions from `null_space`.
    AmbiguousRank { candidates: (usize, usize), gap_ratio: f64 },
    #[error("tower generator error: {0}")]
    GeneratorError(String),
    #[error("trace {trace:.6e} is not within tolerance of an integer")]
    NonIntegerTrace { trace: f64 },
    #[error("path too coarse: consecutive projections differ by {jump:.3e} at step {step}")]
    PathTooCoarse { step: usize, jump: f64 },
    #[error("eigenvalue branch matching ambiguous near t = {t}; refine the grid")]
    RefineGrid { t: f64 },
    #[error("no admissible spectral gap on [{a}, {b}]")]
    PartitionFailure { a: f64, b: f64 },
    #[error("gap shift failed: spectrum entered the protected window ({0})")]
    ShiftFailure(String),
    #[error("partition-dependent result: {coarse} on the initial partition, {refined} after refinement")]
    PartitionDependence { coarse: i64, refined: i64 },
    #[error("cutoff too small at t = {t}: f^2 = {value:.4e} < required {required:.4e}")]
    CutoffTooSmall { t: f64, value: f64, required: f64 },
    #[error("family is not simultaneously diagonalizable (off-diagonal residual {residual:.3e})")]
    NotDiagonalizable { residual: f64 },
    #[error("collar mismatch: potentials differ by {mismatch:.3e} on the collar")]
    CollarMismatch { mismatch: f64 },
    #[error("ramp crosses the spectrum: min |eigenvalue| = {min_abs_eig:.3e} at t = {t}")]
    RampCrossing { t: f64, min_abs_eig: f64 },
    #[error("identity violated: {0}")]
    TheoremViolation(String),
    #[error("tower too shallow: index values {values:?} have not stabilized")]
    TowerTooShallow { values: Vec<i64> },
    #[error("compact template invalid: {0}")]
    CompactTemplateInvalid(String),
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
    #[error("perturbation is not relatively compact: {0}")]
    NotRelativelyCompact(String),
    #[error("numerical backend failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors that signal an unmet precondition rather than a
    /// failed identity or malformed input.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::HypothesisUnmet(_)
                | Error::NotInvertible { .. }
                | Error::CompactTemplateInvalid(_)
                | Error::NotRelativelyCompact(_)
                | Error::CutoffTooSmall { .. }
                | Error::NotDiagonalizable { .. }
                | Error::CollarMismatch { .. }
                | Error::RampCrossing { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
