use crate::error::{Error, Result};
use crate::specflow::PotentialPath;

/// Uniform grid on `[-L, L]` with `n_cells` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub half_length: f64,
    pub n_cells: usize,
}

/// Decay target used when choosing `L`: the slowest kernel mode must fall by this factor.
pub const DECAY_FACTOR: f64 = 1e8;

impl GridSpec {
    pub fn new(half_length: f64, n_cells: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) || n_cells < 2 {
            return Err(Error::InvalidInput(format!("bad grid: L = {half_length}, n_cells = {n_cells}")));
        }
        Ok(Self { half_length, n_cells })
    }

    /// Grid on `[-L, L]` with spacing at most `h`.
    pub fn with_spacing(half_length: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidInput(format!("grid spacing must be positive, got {h}")));
        }
        Self::new(half_length, ((2.0 * half_length / h).ceil() as usize).max(2))
    }

    /// Chooses `L >= max|K| + ln(1e8) / c`, where `c` is the smallest
    /// `|eigenvalue|` of the path outside `K` (sampled on the path grid and
    /// at its constant extensions), and spacing at most `h`.
    pub fn auto(path: &PotentialPath, h: f64) -> Result<Self> {
        let c = decay_rate(path)?;
        let reach = path.compact_hull().map(|(a, b)| a.abs().max(b.abs())).unwrap_or(0.0);
        Self::with_spacing(reach + DECAY_FACTOR.ln() / c, h)
    }

    /// As [`GridSpec::auto`], for kernel modes decaying like `exp(-lambda c |t|)`.
    pub fn auto_coupled(path: &PotentialPath, lambda: f64, h: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidInput(format!("coupling must be positive, got {lambda}")));
        }
        let c = decay_rate(path)?;
        let reach = path.compact_hull().map(|(a, b)| a.abs().max(b.abs())).unwrap_or(0.0);
        Self::with_spacing(reach + DECAY_FACTOR.ln() / (lambda * c), h)
    }

    /// The longer of two grids, at the finer of their spacings.
    pub fn max_with(&self, other: &Self) -> Self {
        let h = self.h().min(other.h());
        Self::with_spacing(self.half_length.max(other.half_length), h).expect("valid grids")
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_length / self.n_cells as f64
    }

    /// Node `j` for `j = 0..=n_cells`.
    pub fn node(&self, j: usize) -> f64 {
        if j == self.n_cells {
            self.half_length
        } else {
            -self.half_length + j as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|j| self.node(j)).collect()
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        -self.half_length + (j as f64 + 0.5) * self.h()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.midpoint(j)).collect()
    }

    /// Same interval with half the spacing.
    pub fn refined(&self) -> Self {
        Self { half_length: self.half_length, n_cells: 2 * self.n_cells }
    }
}

/// Smallest `|eigenvalue|` of `S` outside `K`.
pub fn decay_rate(path: &PotentialPath) -> Result<f64> {
    let mut c = f64::INFINITY;
    let pts = path.grid().iter().copied().chain([path.start() - 1.0, path.end() + 1.0]);
    for t in pts {
        if !path.in_compact_set(t) {
            c = c.min(path.sample(t)?.min_abs_eigenvalue()?);
        }
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NotInvertible { min_abs_eig: if c.is_finite() { c } else { 0.0 }, tol: 0.0 });
    }
    Ok(c)
}
