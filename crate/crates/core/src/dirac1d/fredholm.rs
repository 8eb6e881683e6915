use faer::{c64, Mat};

use super::assemble::{assemble, BoundaryCondition};
use super::grid::GridSpec;
use crate::error::{Error, Result};
use crate::opcore::{linalg, HermitianOperator, Tolerances};
use crate::scenarios::smoothstep;
use crate::specflow::PotentialPath;

/// Constants entering the lower bound `D~^2 + f^2 >= eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FredholmConstants {
    /// `inf |spec S(x)|` outside `K`.
    pub c_hat: f64,
    /// `sup |S'(x) (S(x) +- i)^{-1}|` outside `K`.
    pub delta_hat: f64,
    /// The same supremum over `K`.
    pub delta_k: f64,
    /// Smallest admissible coupling.
    pub lambda0: f64,
    /// `(lambda0^2 c^2 - delta^2 (1 + 1/c)^2) / 2`.
    pub epsilon: f64,
    /// `delta_hat < c_hat^2 / (c_hat + 1)`, in which case `lambda0 = 1`.
    pub unit_coupling: bool,
}

/// `delta_x = max_{+-} |S'(x) (S(x) +- i)^{-1}|`, with `S'` from a central difference.
fn delta_at(path: &PotentialPath, t: f64) -> Result<f64> {
    let h = 1e-4 * t.abs().max(1.0);
    let s = path.sample(t)?;
    let ds = linalg::scale((&path.raw(t + h) - &path.raw(t - h)).as_ref(), 0.5 / h);
    let eig = s.eigh()?;
    let mut worst = 0.0f64;
    for sign in [1.0, -1.0] {
        let res = eig.reconstruct_complex(|v| c64::new(1.0, 0.0) / c64::new(v, sign));
        worst = worst.max(linalg::opnorm((&ds * &res).as_ref()));
    }
    Ok(worst)
}

/// Samples the constants on the grid nodes. The endpoints of `K` also count
/// as outside points, since the infimum and supremum over the complement of
/// `K` extend to its closure.
pub fn fredholm_constants(path: &PotentialPath, grid: &GridSpec) -> Result<FredholmConstants> {
    let (mut c_hat, mut delta_hat, mut delta_k) = (f64::INFINITY, 0.0f64, 0.0f64);
    let boundary: Vec<f64> = path.compact_set().iter().flat_map(|&(a, b)| [a, b]).collect();
    for t in grid.nodes() {
        let d = delta_at(path, t)?;
        if path.in_compact_set(t) {
            delta_k = delta_k.max(d);
        } else {
            c_hat = c_hat.min(path.sample(t)?.min_abs_eigenvalue()?);
            delta_hat = delta_hat.max(d);
        }
    }
    for t in boundary {
        let d = delta_at(path, t)?;
        delta_k = delta_k.max(d);
        c_hat = c_hat.min(path.sample(t)?.min_abs_eigenvalue()?);
        delta_hat = delta_hat.max(d);
    }
    if !(c_hat > 0.0) || !c_hat.is_finite() {
        return Err(Error::NotInvertible { min_abs_eig: if c_hat.is_finite() { c_hat } else { 0.0 }, tol: 0.0 });
    }
    let slope = delta_hat * (1.0 + 1.0 / c_hat) / c_hat;
    let unit_coupling = delta_hat < c_hat * c_hat / (c_hat + 1.0);
    let lambda0 = if unit_coupling { 1.0 } else { (std::f64::consts::SQRT_2 * slope).max(1.0) };
    let epsilon = 0.5 * (lambda0 * lambda0 * c_hat * c_hat - (delta_hat * (1.0 + 1.0 / c_hat)).powi(2));
    Ok(FredholmConstants { c_hat, delta_hat, delta_k, lambda0, epsilon, unit_coupling })
}

/// Smooth cutoff equal to `amplitude` on `K`, decaying to zero over `ramp`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cutoff {
    pub amplitude: f64,
    pub plateau: Vec<(f64, f64)>,
    pub ramp: f64,
}

impl Cutoff {
    pub fn eval(&self, t: f64) -> f64 {
        let dist = self
            .plateau
            .iter()
            .map(|&(a, b)| if t < a { a - t } else if t > b { t - b } else { 0.0 })
            .fold(f64::INFINITY, f64::min);
        if !dist.is_finite() {
            return 0.0;
        }
        self.amplitude * (1.0 - smoothstep(dist / self.ramp))
    }

    /// Smallest cutoff meeting `f^2 >= eps + (lambda^2 + delta_K^2) / 2` on `K`.
    pub fn minimal(path: &PotentialPath, constants: &FredholmConstants, lambda: f64) -> Self {
        let amplitude = (constants.epsilon + 0.5 * (lambda * lambda + constants.delta_k * constants.delta_k)).sqrt();
        Self { amplitude, plateau: path.compact_set().to_vec(), ramp: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FredholmBoundReport {
    pub constants: FredholmConstants,
    pub lambda: f64,
    pub cutoff: Cutoff,
    /// Smallest eigenvalue of `D~^2 + f^2` on the Dirichlet discretization.
    pub min_eig: f64,
    /// `min_eig >= 0.8 eps`.
    pub pass: bool,
    /// `max(0, eps - min_eig)`.
    pub deficit: f64,
    pub grid: GridSpec,
}

/// Fraction of `eps` the discrete bound must reach.
pub const BOUND_FRACTION: f64 = 0.8;

/// Checks `spec(D~^2 + f^2) in [eps, inf)` on the grid.
///
/// `D~^2 = diag(D* D, D D*)` and `f^2` acts by multiplication, at nodes on
/// the first block and at cell midpoints on the second. `D` carries the
/// spectral boundary condition: with zero boundary values, `D D*` acquires
/// near-null modes concentrated at `+-L`, where `f` vanishes, that have no
/// counterpart on the line.
pub fn fredholm_bounds(
    path: &PotentialPath,
    lambda: f64,
    cutoff: Option<Cutoff>,
    grid: GridSpec,
    tol: &Tolerances,
) -> Result<FredholmBoundReport> {
    let constants = fredholm_constants(path, &grid)?;
    if lambda < constants.lambda0 {
        return Err(Error::HypothesisUnmet(format!("lambda = {lambda} is below lambda0 = {}", constants.lambda0)));
    }
    let required = constants.epsilon + 0.5 * (lambda * lambda + constants.delta_k * constants.delta_k);
    let cutoff = cutoff.unwrap_or_else(|| Cutoff::minimal(path, &constants, lambda));
    for t in grid.nodes().into_iter().filter(|&t| path.in_compact_set(t)) {
        let f = cutoff.eval(t);
        if f * f < required * (1.0 - 1e-12) {
            return Err(Error::CutoffTooSmall { t, value: f * f, required });
        }
    }
    let op = assemble(path, grid, BoundaryCondition::Aps, lambda, tol)?;
    let k = path.fiber_dim();
    let n = grid.n_cells;
    let d = &op.matrix;
    let (dl, dr) = op.boundary_dims();
    let f2 = |t: f64| cutoff.eval(t).powi(2);
    let node_f2: Vec<f64> = std::iter::repeat_n(f2(grid.node(0)), dl)
        .chain((1..n).flat_map(|j| std::iter::repeat_n(f2(grid.node(j)), k)))
        .chain(std::iter::repeat_n(f2(grid.node(n)), dr))
        .collect();
    let cell_f2: Vec<f64> = (0..n).flat_map(|j| std::iter::repeat_n(f2(grid.midpoint(j)), k)).collect();
    let dd = d.adjoint() * d;
    let ddt = d * d.adjoint();
    let mut min_eig = f64::INFINITY;
    for (block, f2) in [(dd, node_f2), (ddt, cell_f2)] {
        let m = Mat::from_fn(block.nrows(), block.ncols(), |i, j| if i == j { block[(i, j)] + f2[i] } else { block[(i, j)] });
        let ev = HermitianOperator::new(m)?.eigenvalues()?;
        min_eig = min_eig.min(ev[0]);
    }
    let eps = constants.epsilon;
    Ok(FredholmBoundReport {
        constants,
        lambda,
        cutoff,
        min_eig,
        pass: eps > 0.0 && min_eig >= BOUND_FRACTION * eps,
        deficit: (eps - min_eig).max(0.0),
        grid,
    })
}
