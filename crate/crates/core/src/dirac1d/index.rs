use faer::c64;

use super::assemble::{assemble, BoundaryCondition, DiscretizedDiracSchroedinger};
use crate::error::{Error, Result};
use crate::opcore::{decide_rank, linalg, null_space, CMat, RankDecision, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexOptions {
    pub tol: Tolerances,
    /// Recompute kernel dimensions on the grid with half the spacing and
    /// require agreement.
    pub refine: bool,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), refine: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexReport {
    pub index: i64,
    pub dim_ker: usize,
    pub dim_coker: usize,
    /// `cols - rows` of the assembled matrix.
    pub structural_index: i64,
    pub shape: (usize, usize),
    pub decision: RankDecision,
    /// Up to four smallest singular values, nonincreasing.
    pub smallest_singular_values: Vec<f64>,
    /// `(dim ker, dim coker)` on the refined grid, when requested.
    pub refined: Option<(usize, usize)>,
}

/// Kernel and cokernel dimensions from one singular value computation:
/// `dim ker = cols - rank`, `dim coker = rows - rank`.
pub fn index_report(op: &DiscretizedDiracSchroedinger, opts: &IndexOptions) -> Result<IndexReport> {
    let (rows, cols) = (op.rows(), op.cols());
    let (dim_ker, dim_coker, decision, sv) = kernel_dims(&op.matrix, &opts.tol)?;
    let refined = if opts.refine {
        let fine = assemble(&op.path, op.grid.refined(), op.bc, op.lambda, &opts.tol)?;
        let (k2, c2, _, _) = kernel_dims(&fine.matrix, &opts.tol)?;
        if (k2, c2) != (dim_ker, dim_coker) {
            return Err(Error::AmbiguousRank { candidates: (dim_ker, k2), gap_ratio: decision.gap_ratio });
        }
        Some((k2, c2))
    } else {
        None
    };
    let smallest_singular_values = sv.iter().rev().take(4).rev().copied().collect();
    Ok(IndexReport {
        index: dim_ker as i64 - dim_coker as i64,
        dim_ker,
        dim_coker,
        structural_index: op.structural_index(),
        shape: (rows, cols),
        decision,
        smallest_singular_values,
        refined,
    })
}

fn kernel_dims(m: &CMat, tol: &Tolerances) -> Result<(usize, usize, RankDecision, Vec<f64>)> {
    let sv = linalg::singular_values(m.as_ref())?;
    let decision = decide_rank(&sv, tol)?;
    Ok((m.ncols() - decision.rank, m.nrows() - decision.rank, decision, sv))
}

/// Kernel vectors of the discretized operator as `(n + 1) x k` node values.
pub fn kernel_vectors(op: &DiscretizedDiracSchroedinger, tol: &Tolerances) -> Result<Vec<CMat>> {
    let ns = null_space(op.matrix.as_ref(), tol)?;
    (0..ns.dim)
        .map(|c| {
            let v: Vec<c64> = (0..ns.basis.nrows()).map(|i| ns.basis[(i, c)]).collect();
            op.node_values(&v)
        })
        .collect()
}

/// Assembles with the spectral boundary condition and computes the index.
pub fn solve_index(
    path: &crate::specflow::PotentialPath,
    grid: super::GridSpec,
    lambda: f64,
    opts: &IndexOptions,
) -> Result<IndexReport> {
    let op = assemble(path, grid, BoundaryCondition::Aps, lambda, &opts.tol)?;
    index_report(&op, opts)
}
