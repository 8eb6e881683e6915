use faer::{c64, Mat};

use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::opcore::{CMat, Tolerances};
use crate::specflow::PotentialPath;

/// Boundary condition at `+-L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// Spectral (APS-type) condition: at `-L` the value lies in the negative
    /// spectral subspace of `S(-L)`, at `+L` in the positive subspace of `S(L)`.
    Aps,
    /// Zero values at both ends; yields a square matrix.
    Dirichlet,
}

/// Cell-centered discretization of `D = -i d/dt - i lambda S(t)` on `[-L, L]`.
///
/// Unknowns live on nodes, equations on cells. On cell `j` the equation is
/// the midpoint (Cayley) rule
/// `-i (psi_{j+1} - psi_j) / h - i lambda S(t_{j+1/2}) (psi_j + psi_{j+1}) / 2`,
/// a Cayley-type step that stays well conditioned for modes with large
/// `lambda |S|`.
#[derive(Clone, Debug)]
pub struct DiscretizedDiracSchroedinger {
    pub matrix: CMat,
    pub bc: BoundaryCondition,
    pub grid: GridSpec,
    pub lambda: f64,
    pub path: PotentialPath,
    left_basis: CMat,
    right_basis: CMat,
}

pub fn assemble(
    path: &PotentialPath,
    grid: GridSpec,
    bc: BoundaryCondition,
    lambda: f64,
    tol: &Tolerances,
) -> Result<DiscretizedDiracSchroedinger> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let k = path.fiber_dim();
    let n = grid.n_cells;
    let h = grid.h();
    let (left_basis, right_basis) = match bc {
        BoundaryCondition::Aps => {
            let sl = path.sample(-grid.half_length)?.eigh()?;
            let sr = path.sample(grid.half_length)?.eigh()?;
            for e in [&sl, &sr] {
                if e.min_abs() < tol.proj_gap_tol {
                    return Err(Error::NotInvertible { min_abs_eig: e.min_abs(), tol: tol.proj_gap_tol });
                }
            }
            (sl.basis_where(|v| v < 0.0), sr.basis_where(|v| v > 0.0))
        }
        BoundaryCondition::Dirichlet => (Mat::zeros(k, 0), Mat::zeros(k, 0)),
    };
    let (dl, dr) = (left_basis.ncols(), right_basis.ncols());
    let (rows, cols, first_row_cell) = match bc {
        BoundaryCondition::Aps => (n * k, dl + (n - 1) * k + dr, 0),
        BoundaryCondition::Dirichlet => ((n - 1) * k, (n - 1) * k, 1),
    };
    // Column offset of node j (interior nodes only for Dirichlet).
    let col_of = |j: usize| -> usize {
        match bc {
            BoundaryCondition::Aps => if j == 0 { 0 } else { dl + (j - 1) * k },
            BoundaryCondition::Dirichlet => (j - 1) * k,
        }
    };
    let mut m = Mat::<c64>::zeros(rows, cols);
    let ih = c64::new(0.0, 1.0 / h);
    let half_il = c64::new(0.0, 0.5 * lambda);
    for cell in first_row_cell..n {
        let s = path.sample(grid.midpoint(cell))?;
        let s = s.entries();
        let r0 = (cell - first_row_cell) * k;
        // Coefficient blocks of psi_cell and psi_{cell+1}.
        let a = Mat::from_fn(k, k, |i, j| if i == j { ih } else { c64::new(0.0, 0.0) } - half_il * s[(i, j)]);
        let b = Mat::from_fn(k, k, |i, j| if i == j { -ih } else { c64::new(0.0, 0.0) } - half_il * s[(i, j)]);
        for (node, blk) in [(cell, &a), (cell + 1, &b)] {
            let interior = node > 0 && node < n;
            if interior {
                let c0 = col_of(node);
                for j in 0..k {
                    for i in 0..k {
                        m[(r0 + i, c0 + j)] = blk[(i, j)];
                    }
                }
            } else if bc == BoundaryCondition::Aps {
                let (basis, c0) = if node == 0 { (&left_basis, 0) } else { (&right_basis, dl + (n - 1) * k) };
                let reduced = blk * basis;
                for j in 0..reduced.ncols() {
                    for i in 0..k {
                        m[(r0 + i, c0 + j)] = reduced[(i, j)];
                    }
                }
            }
        }
    }
    Ok(DiscretizedDiracSchroedinger { matrix: m, bc, grid, lambda, path: path.clone(), left_basis, right_basis })
}

impl DiscretizedDiracSchroedinger {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Dimensions kept at the left and right boundary nodes.
    pub fn boundary_dims(&self) -> (usize, usize) {
        (self.left_basis.ncols(), self.right_basis.ncols())
    }

    /// Number of boundary directions removed at the two ends.
    pub fn removed_boundary_dims(&self) -> usize {
        let k = self.path.fiber_dim();
        match self.bc {
            BoundaryCondition::Aps => 2 * k - self.left_basis.ncols() - self.right_basis.ncols(),
            BoundaryCondition::Dirichlet => 2 * k,
        }
    }

    /// Index forced by the shape: `cols - rows`.
    pub fn structural_index(&self) -> i64 {
        self.cols() as i64 - self.rows() as i64
    }

    /// Node values `(n + 1) x k` of a coefficient vector.
    pub fn node_values(&self, v: &[c64]) -> Result<CMat> {
        if v.len() != self.cols() {
            return Err(Error::InvalidInput("coefficient vector has the wrong length".into()));
        }
        let k = self.path.fiber_dim();
        let n = self.grid.n_cells;
        let mut out = Mat::<c64>::zeros(n + 1, k);
        let dl = self.left_basis.ncols();
        let off_interior = if self.bc == BoundaryCondition::Aps { dl } else { 0 };
        for node in 1..n {
            for i in 0..k {
                out[(node, i)] = v[off_interior + (node - 1) * k + i];
            }
        }
        if self.bc == BoundaryCondition::Aps {
            let right0 = dl + (n - 1) * k;
            for i in 0..k {
                out[(0, i)] = (0..dl).map(|c| self.left_basis[(i, c)] * v[c]).sum();
                out[(n, i)] = (0..self.right_basis.ncols()).map(|c| self.right_basis[(i, c)] * v[right0 + c]).sum();
            }
        }
        Ok(out)
    }
}
