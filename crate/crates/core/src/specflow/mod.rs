//! Spectral flow of paths of Hermitian matrices.
//!
//! Three independent computations of the same integer:
//!
//! * [`sf_crossings`] tracks eigenvalue branches and counts signed zero
//!   crossings;
//! * [`sf_partition`] chooses a partition with a trivialising level on each
//!   piece and sums the junction indices;
//! * the relative index of the endpoint projections, `rel-ind(P_+(S(1)), P_+(S(0)))`.
//!
//! [`endpoint_identity`] evaluates all of them (plus the endpoint
//! trivialising family) and reports whether they agree.

mod crossings;
mod partition;
mod path;
mod trivialising;

pub use crossings::{sf_crossings, Crossing, CrossingOptions, CrossingReport};
pub use partition::{sf_partition, PartitionFlow, PartitionOptions};
pub use path::{linspace, PathDiagnostics, PotentialPath, Sampler};
pub use trivialising::{ind_triple, make_trivialising_endpoint, make_trivialising_gapshift, TrivialisingFamily};

use crate::error::Result;
use crate::opcore::{positive_projection, HermitianOperator, Tolerances};
use crate::relindex::rel_index_of;

/// `rel-ind(P_+(S(end)), P_+(S(start)))`.
pub fn endpoint_relative_index(path: &PotentialPath, tol: &Tolerances) -> Result<i64> {
    let p1 = positive_projection(&path.sample(path.end())?, tol.proj_gap_tol)?;
    let p0 = positive_projection(&path.sample(path.start())?, tol.proj_gap_tol)?;
    rel_index_of(&p1, &p0, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EndpointIdentity {
    pub crossings: i64,
    pub partition: i64,
    pub relative_index: i64,
    /// `ind(S(end), B(end), 0)` for the endpoint trivialising family.
    pub trivialising: i64,
    pub holds: bool,
}

/// Computes the spectral flow in every available way.
pub fn endpoint_identity(path: &PotentialPath, tol: &Tolerances) -> Result<EndpointIdentity> {
    let crossings = sf_crossings(path, &CrossingOptions { tol: *tol, ..Default::default() })?.flow;
    let partition = sf_partition(path, &PartitionOptions { tol: *tol, ..Default::default() })?.flow;
    let relative_index = endpoint_relative_index(path, tol)?;
    let family = make_trivialising_endpoint(path, tol)?;
    let s1 = path.sample(path.end())?;
    let trivialising = ind_triple(&s1, &family.at(path.end())?, &HermitianOperator::zeros(s1.dim()), tol)?;
    let holds = crossings == partition && partition == relative_index && relative_index == trivialising;
    Ok(EndpointIdentity { crossings, partition, relative_index, trivialising, holds })
}

#[cfg(test)]
mod tests;
