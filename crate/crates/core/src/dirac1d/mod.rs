//! The operator `D = -i d/dt - i lambda S(t)` on the line, discretized.
//!
//! A potential path `S` that is invertible outside a compact set `K` makes
//! `D` Fredholm for large enough `lambda`; its index equals the spectral
//! flow of `S`. This module assembles finite-difference versions of `D`
//! with spectral or Dirichlet boundary conditions at `+-L`, reads off the
//! index from a single singular value computation, compares commuting
//! families against a closed form, and checks the lower bound
//! `D~^2 + f^2 >= eps` that underlies the Fredholm property.
//!
//! Grid choice: `L` is taken so that the slowest kernel mode, which decays
//! like `exp(-c |t|)` with `c` the spectral gap of `S` outside `K`, has
//! fallen by `1e8` at the boundary.

mod assemble;
mod doubled;
mod fredholm;
mod grid;
mod index;
mod oracle;

pub use assemble::{assemble, BoundaryCondition, DiscretizedDiracSchroedinger};
pub use doubled::DoubledOperator;
pub use fredholm::{fredholm_bounds, fredholm_constants, Cutoff, FredholmBoundReport, FredholmConstants, BOUND_FRACTION};
pub use grid::{decay_rate, GridSpec, DECAY_FACTOR};
pub use index::{index_report, kernel_vectors, solve_index, IndexOptions, IndexReport};
pub use oracle::{kernel_oracle_diagonal, profile_error, DiagonalOracle};

use crate::error::{Error, Result};
use crate::specflow::PotentialPath;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub lambda0: f64,
    pub lambdas: Vec<f64>,
    pub indices: Vec<i64>,
    pub constant: bool,
}

/// Index at each coupling in `lambdas`; every coupling must be at least `lambda0`.
pub fn lambda_sweep(path: &PotentialPath, lambdas: &[f64], grid: GridSpec, opts: &IndexOptions) -> Result<SweepReport> {
    let lambda0 = fredholm_constants(path, &grid)?.lambda0;
    if let Some(&bad) = lambdas.iter().find(|&&l| l < lambda0) {
        return Err(Error::HypothesisUnmet(format!("lambda = {bad} is below lambda0 = {lambda0}")));
    }
    let indices = lambdas.iter().map(|&l| Ok(solve_index(path, grid, l, opts)?.index)).collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { lambda0, lambdas: lambdas.to_vec(), constant: indices.windows(2).all(|w| w[0] == w[1]), indices })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationReport {
    pub base: IndexReport,
    pub perturbed: IndexReport,
    pub equal: bool,
}

fn check_support(path: &PotentialPath, bump: &PotentialPath, grid: &GridSpec) -> Result<()> {
    for t in grid.nodes().into_iter().filter(|&t| !path.in_compact_set(t)) {
        let r = bump.sample(t)?.spectral_norm()?;
        if r > 1e-12 {
            return Err(Error::InvalidInput(format!("perturbation is not supported in K: |R({t})| = {r:.3e}")));
        }
    }
    Ok(())
}

/// Index of `S` and of `S + R` for `R` supported in `K`.
pub fn perturbation_invariance(
    path: &PotentialPath,
    bump: &PotentialPath,
    grid: GridSpec,
    lambda: f64,
    opts: &IndexOptions,
) -> Result<PerturbationReport> {
    check_support(path, bump, &grid)?;
    let base = solve_index(path, grid, lambda, opts)?;
    let perturbed = solve_index(&path.plus(bump)?, grid, lambda, opts)?;
    Ok(PerturbationReport { equal: base.index == perturbed.index, base, perturbed })
}

/// [`perturbation_invariance`] for several perturbations against one base index.
pub fn perturbations_invariance(
    path: &PotentialPath,
    bumps: &[PotentialPath],
    grid: GridSpec,
    lambda: f64,
    opts: &IndexOptions,
) -> Result<(i64, Vec<i64>)> {
    for b in bumps {
        check_support(path, b, &grid)?;
    }
    let base = solve_index(path, grid, lambda, opts)?.index;
    let perturbed = bumps.iter().map(|b| Ok(solve_index(&path.plus(b)?, grid, lambda, opts)?.index)).collect::<Result<Vec<_>>>()?;
    Ok((base, perturbed))
}

#[cfg(test)]
mod tests;
