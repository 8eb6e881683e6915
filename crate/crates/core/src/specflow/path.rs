use std::sync::Arc;

use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::opcore::{CMat, HermitianOperator};

/// A matrix-valued function of one real variable.
pub type Sampler = Arc<dyn Fn(f64) -> CMat + Send + Sync>;

/// A path `t -> S(t)` of Hermitian `k x k` matrices.
///
/// The path is defined on `[grid[0], grid[last]]` and extended by constants
/// outside. The optional compact set `K` is a finite union of closed
/// intervals; outside `K` the path is expected to be invertible.
#[derive(Clone)]
pub struct PotentialPath {
    fiber_dim: usize,
    grid: Vec<f64>,
    sampler: Sampler,
    compact_set: Vec<(f64, f64)>,
}

impl std::fmt::Debug for PotentialPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialPath")
            .field("fiber_dim", &self.fiber_dim)
            .field("grid", &format_args!("[{} points on [{}, {}]]", self.grid.len(), self.start(), self.end()))
            .field("compact_set", &self.compact_set)
            .finish()
    }
}

/// `n` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

impl PotentialPath {
    pub fn new(fiber_dim: usize, grid: Vec<f64>, sampler: Sampler) -> Result<Self> {
        if fiber_dim == 0 {
            return Err(Error::InvalidInput("fiber dimension must be positive".into()));
        }
        if grid.len() < 2 || grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("grid must have at least two finite, strictly increasing points".into()));
        }
        let first = sampler(grid[0]);
        if first.nrows() != fiber_dim || first.ncols() != fiber_dim {
            return Err(Error::InvalidInput(format!(
                "sampler returns {}x{} matrices, expected {fiber_dim}x{fiber_dim}",
                first.nrows(),
                first.ncols()
            )));
        }
        Ok(Self { fiber_dim, grid, sampler, compact_set: Vec::new() })
    }

    pub fn from_fn(fiber_dim: usize, grid: Vec<f64>, f: impl Fn(f64) -> CMat + Send + Sync + 'static) -> Result<Self> {
        Self::new(fiber_dim, grid, Arc::new(f))
    }

    /// A scalar path `t -> diag(f_1(t), ..., f_k(t))`.
    pub fn diagonal(grid: Vec<f64>, fs: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>>) -> Result<Self> {
        let k = fs.len();
        Self::from_fn(k, grid, move |t| {
            Mat::from_fn(k, k, |i, j| if i == j { c64::new(fs[i](t), 0.0) } else { c64::new(0.0, 0.0) })
        })
    }

    pub fn constant(value: &HermitianOperator, grid: Vec<f64>) -> Result<Self> {
        let m = value.entries().to_owned();
        Self::from_fn(value.dim(), grid, move |_| m.clone())
    }

    /// Sets the compact set `K`; overlapping intervals are merged.
    pub fn with_compact_set(mut self, intervals: &[(f64, f64)]) -> Result<Self> {
        let mut iv: Vec<(f64, f64)> = intervals.to_vec();
        if iv.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::InvalidInput(format!("compact set intervals must satisfy a < b: {intervals:?}")));
        }
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        self.compact_set = merged;
        Ok(self)
    }

    pub fn with_grid(&self, grid: Vec<f64>) -> Result<Self> {
        let mut p = Self::new(self.fiber_dim, grid, self.sampler.clone())?;
        p.compact_set = self.compact_set.clone();
        Ok(p)
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn compact_set(&self) -> &[(f64, f64)] {
        &self.compact_set
    }

    /// Smallest interval containing `K`, if `K` is nonempty.
    pub fn compact_hull(&self) -> Option<(f64, f64)> {
        Some((self.compact_set.first()?.0, self.compact_set.last()?.1))
    }

    pub fn in_compact_set(&self, t: f64) -> bool {
        self.compact_set.iter().any(|&(a, b)| a <= t && t <= b)
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    /// Raw sampler output at `t`, clamped to the grid span.
    pub fn raw(&self, t: f64) -> CMat {
        (self.sampler)(t.clamp(self.start(), self.end()))
    }

    pub fn sample(&self, t: f64) -> Result<HermitianOperator> {
        HermitianOperator::new(self.raw(t))
    }

    /// Smallest `|eigenvalue|` over grid points outside `K`, together with
    /// the largest input Hermitian residual seen on the grid.
    pub fn diagnostics(&self) -> Result<PathDiagnostics> {
        let mut min_gap_outside = f64::INFINITY;
        let mut max_input_residual = 0.0f64;
        for &t in &self.grid {
            let s = self.sample(t)?;
            max_input_residual = max_input_residual.max(s.input_residual());
            if !self.in_compact_set(t) {
                min_gap_outside = min_gap_outside.min(s.min_abs_eigenvalue()?);
            }
        }
        Ok(PathDiagnostics { min_gap_outside, max_input_residual })
    }

    /// `t -> f(t, S(t))`, keeping grid and compact set.
    pub fn mapped(&self, f: impl Fn(f64, CMat) -> CMat + Send + Sync + 'static) -> Result<Self> {
        let s = self.sampler.clone();
        let mut p = Self::new(self.fiber_dim, self.grid.clone(), Arc::new(move |t| f(t, s(t))))?;
        p.compact_set = self.compact_set.clone();
        Ok(p)
    }

    /// `S + R`, with `K` taken from `self`.
    pub fn plus(&self, other: &PotentialPath) -> Result<Self> {
        if other.fiber_dim != self.fiber_dim {
            return Err(Error::InvalidInput("fiber dimensions differ".into()));
        }
        let r = other.clone();
        self.mapped(move |t, m| &m + &r.raw(t))
    }

    /// `t -> S(a + b - t)` on the reflected grid.
    pub fn reversed(&self) -> Result<Self> {
        let (a, b) = (self.start(), self.end());
        let grid: Vec<f64> = self.grid.iter().rev().map(|&t| a + b - t).collect();
        let s = self.sampler.clone();
        let mut p = Self::new(self.fiber_dim, grid, Arc::new(move |t| s(a + b - t)))?;
        let k: Vec<(f64, f64)> = self.compact_set.iter().map(|&(x, y)| (a + b - y, a + b - x)).collect();
        if !k.is_empty() {
            p = p.with_compact_set(&k)?;
        }
        Ok(p)
    }

    /// Block-diagonal direct sum of paths over a common grid; `K` is the union.
    pub fn direct_sum(paths: &[PotentialPath], grid: Vec<f64>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidInput("direct sum of no paths".into()));
        }
        let dims: Vec<usize> = paths.iter().map(|p| p.fiber_dim).collect();
        let k: usize = dims.iter().sum();
        let parts: Vec<PotentialPath> = paths.to_vec();
        let union: Vec<(f64, f64)> = paths.iter().flat_map(|p| p.compact_set.iter().copied()).collect();
        let p = Self::from_fn(k, grid, move |t| {
            let mut m = Mat::<c64>::zeros(k, k);
            let mut off = 0;
            for (part, &d) in parts.iter().zip(&dims) {
                let block = part.raw(t);
                for j in 0..d {
                    for i in 0..d {
                        m[(off + i, off + j)] = block[(i, j)];
                    }
                }
                off += d;
            }
            m
        })?;
        if union.is_empty() {
            Ok(p)
        } else {
            p.with_compact_set(&union)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathDiagnostics {
    pub min_gap_outside: f64,
    pub max_input_residual: f64,
}
