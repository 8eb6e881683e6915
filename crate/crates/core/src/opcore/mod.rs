//! Finite-dimensional operator core.
//!
//! Hermitian matrices, their spectral functional calculus, orthogonal
//! projections, numerical kernels with explicit rank decisions, the
//! resolvent quadrature for `(1 + H^2)^{-1/2}`, and truncation towers that
//! emulate a compact or unbounded operator by nested compressions.
//!
//! Every other module builds on these types. Nothing here knows about
//! paths or the line.

pub mod functional;
pub mod hermitian;
pub mod linalg;
pub mod nullspace;
pub mod projection;
pub mod quadrature;
pub mod tolerances;
pub mod tower;

pub use functional::{
    apply_complex_function, apply_function, bounded_transform, inv_sqrt_positive, positive_projection,
    spectral_projection_above, sqrt_positive,
};
pub use hermitian::{Eigh, HermitianOperator};
pub use linalg::CMat;
pub use nullspace::{decide_rank, null_space, NullSpace, RankDecision};
pub use projection::Projection;
pub use quadrature::{inv_sqrt_via_quadrature, QuadratureResult};
pub use tolerances::Tolerances;
pub use tower::{Template, TemplatePair, TowerGenerator, TowerInstance, TruncationTower};

#[cfg(test)]
mod tests;
