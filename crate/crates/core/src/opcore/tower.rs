use std::sync::Arc;

use faer::{c64, Mat};

use super::hermitian::HermitianOperator;
use super::linalg::CMat;
use crate::error::{Error, Result};

/// An infinite Hermitian matrix given entrywise; finite sections are its
/// top-left compressions, so instances at different sizes nest exactly.
#[derive(Clone)]
pub enum Template {
    Zero,
    /// `c * I`.
    Scalar(f64),
    /// `scale * diag(1, -1, 2, -2, 3, -3, ...)`.
    Alternating { scale: f64 },
    /// `diag(1, 2, 3, ...)`.
    Linear,
    /// `diag(1, 1/2, 1/3, ...)`.
    Harmonic,
    /// Tridiagonal with constant diagonal and off-diagonal.
    Banded { diag: f64, off: f64 },
    /// The rank-one projection onto basis vector `index`.
    BasisProjection { index: usize },
    /// `sum_r a_r v_r v_r*` with `(v_r)_j = exp(-rate |j - r|)`.
    DecayingRank { coeffs: Vec<f64>, rate: f64 },
    /// Arbitrary Hermitian entry rule `(i, j) -> a_ij` with `a_ji = conj(a_ij)`.
    Custom(Arc<dyn Fn(usize, usize) -> c64 + Send + Sync>),
}

impl std::fmt::Debug for Template {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Template::Zero => write!(f, "Zero"),
            Template::Scalar(c) => write!(f, "Scalar({c})"),
            Template::Alternating { scale } => write!(f, "Alternating {{ scale: {scale} }}"),
            Template::Linear => write!(f, "Linear"),
            Template::Harmonic => write!(f, "Harmonic"),
            Template::Banded { diag, off } => write!(f, "Banded {{ diag: {diag}, off: {off} }}"),
            Template::BasisProjection { index } => write!(f, "BasisProjection {{ index: {index} }}"),
            Template::DecayingRank { coeffs, rate } => write!(f, "DecayingRank {{ coeffs: {coeffs:?}, rate: {rate} }}"),
            Template::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Template {
    pub fn entry(&self, i: usize, j: usize) -> c64 {
        let zero = c64::new(0.0, 0.0);
        let real = |x: f64| c64::new(x, 0.0);
        match self {
            Template::Zero => zero,
            Template::Scalar(c) => if i == j { real(*c) } else { zero },
            Template::Alternating { scale } => {
                if i != j {
                    return zero;
                }
                let magnitude = (i / 2 + 1) as f64;
                real(if i % 2 == 0 { scale * magnitude } else { -scale * magnitude })
            }
            Template::Linear => if i == j { real((i + 1) as f64) } else { zero },
            Template::Harmonic => if i == j { real(1.0 / (i + 1) as f64) } else { zero },
            Template::Banded { diag, off } => {
                if i == j {
                    real(*diag)
                } else if i.abs_diff(j) == 1 {
                    real(*off)
                } else {
                    zero
                }
            }
            Template::BasisProjection { index } => if i == *index && j == *index { real(1.0) } else { zero },
            Template::DecayingRank { coeffs, rate } => {
                let v = |r: usize, k: usize| (-rate * r.abs_diff(k) as f64).exp();
                real(coeffs.iter().enumerate().map(|(r, a)| a * v(r, i) * v(r, j)).sum())
            }
            Template::Custom(f) => f(i, j),
        }
    }

    pub fn compress(&self, n: usize) -> Result<HermitianOperator> {
        HermitianOperator::new(Mat::from_fn(n, n, |i, j| self.entry(i, j)))
    }
}

/// Produces the operator and perturbation at a given truncation size.
pub trait TowerGenerator: Send + Sync {
    fn operator(&self, n: usize) -> Result<HermitianOperator>;
    fn perturbation(&self, n: usize) -> Result<HermitianOperator>;
}

/// A pair of templates `(T, R)`.
#[derive(Clone, Debug)]
pub struct TemplatePair {
    pub operator: Template,
    pub perturbation: Template,
}

impl TowerGenerator for TemplatePair {
    fn operator(&self, n: usize) -> Result<HermitianOperator> {
        self.operator.compress(n)
    }
    fn perturbation(&self, n: usize) -> Result<HermitianOperator> {
        self.perturbation.compress(n)
    }
}

/// Nested finite-dimensional compressions `T_n = Pi_n T Pi_n` at increasing sizes.
#[derive(Clone)]
pub struct TruncationTower {
    dims: Vec<usize>,
    generator: Arc<dyn TowerGenerator>,
}

/// Operator and perturbation at one level of a tower.
#[derive(Clone, Debug)]
pub struct TowerInstance {
    pub dim: usize,
    pub operator: HermitianOperator,
    pub perturbation: HermitianOperator,
}

impl TruncationTower {
    pub fn new(dims: Vec<usize>, generator: Arc<dyn TowerGenerator>) -> Result<Self> {
        if dims.is_empty() || dims[0] == 0 || dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!("tower dims must be positive and strictly increasing: {dims:?}")));
        }
        Ok(Self { dims, generator })
    }

    pub fn from_templates(dims: Vec<usize>, operator: Template, perturbation: Template) -> Result<Self> {
        Self::new(dims, Arc::new(TemplatePair { operator, perturbation }))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Instance at size `n`, checked to compress the next-smaller instance exactly.
    pub fn instantiate(&self, n: usize) -> Result<TowerInstance> {
        let pos = self
            .dims
            .iter()
            .position(|&d| d == n)
            .ok_or_else(|| Error::InvalidInput(format!("{n} is not a tower dimension")))?;
        let inst = self.raw_instance(n)?;
        if pos > 0 {
            let prev = self.raw_instance(self.dims[pos - 1])?;
            check_nested(&prev.operator, &inst.operator, "operator")?;
            check_nested(&prev.perturbation, &inst.perturbation, "perturbation")?;
        }
        Ok(inst)
    }

    pub fn instances(&self) -> Result<Vec<TowerInstance>> {
        self.dims.iter().map(|&n| self.instantiate(n)).collect()
    }

    fn raw_instance(&self, n: usize) -> Result<TowerInstance> {
        let operator = self.generator.operator(n)?;
        let perturbation = self.generator.perturbation(n)?;
        if operator.dim() != n || perturbation.dim() != n {
            return Err(Error::GeneratorError(format!("generator returned the wrong size at n = {n}")));
        }
        Ok(TowerInstance { dim: n, operator, perturbation })
    }
}

fn check_nested(small: &HermitianOperator, big: &HermitianOperator, what: &str) -> Result<()> {
    let m = small.dim();
    for j in 0..m {
        for i in 0..m {
            if small.entries()[(i, j)] != big.entries()[(i, j)] {
                return Err(Error::GeneratorError(format!(
                    "{what} at size {} does not compress to the size-{m} instance at ({i}, {j})",
                    big.dim()
                )));
            }
        }
    }
    Ok(())
}

/// Top-left `m x m` block of `a`.
pub fn compress_to(a: &HermitianOperator, m: usize) -> Result<HermitianOperator> {
    if m > a.dim() {
        return Err(Error::InvalidInput("compression larger than operator".into()));
    }
    HermitianOperator::new(Mat::from_fn(m, m, |i, j| a.entries()[(i, j)]))
}

/// Matrix of the coordinate projection onto indices `>= start`.
pub fn tail_projection(n: usize, start: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j && i >= start { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
}
