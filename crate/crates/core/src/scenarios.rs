//! Seeded generators for potentials, paths and perturbations.
//!
//! Everything here is deterministic given a seed: randomness comes from
//! `ChaCha8Rng::seed_from_u64`, and per-case seeds are derived from a base
//! seed with a splitmix64 step so that cases are independent of evaluation
//! order.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::opcore::{CMat, HermitianOperator};
use crate::specflow::{linspace, PotentialPath};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the seed of case `index` from a base seed.
pub fn sub_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_c64(rng: &mut Rng64) -> c64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random Hermitian matrix `(G + G*) / 2` with standard complex Gaussian `G`,
/// rescaled to operator norm `norm`.
pub fn random_hermitian(rng: &mut Rng64, n: usize, norm: f64) -> HermitianOperator {
    let g = Mat::from_fn(n, n, |_, _| gaussian_c64(rng));
    let h = HermitianOperator::new(g).expect("finite Gaussian matrix");
    let s = h.spectral_norm().expect("eigenvalues of a finite matrix");
    if s == 0.0 {
        h
    } else {
        h.scaled(norm / s)
    }
}

/// Random unitary: eigenvectors of a Gaussian Hermitian matrix with random column phases.
pub fn random_unitary(rng: &mut Rng64, n: usize) -> CMat {
    let v = random_hermitian(rng, n, 1.0).eigh().expect("eigendecomposition").vectors;
    let phases: Vec<c64> = (0..n)
        .map(|_| {
            let a: f64 = rng.random_range(0.0..2.0 * PI);
            c64::new(a.cos(), a.sin())
        })
        .collect();
    Mat::from_fn(n, n, |i, j| v[(i, j)] * phases[j])
}

/// `U diag(d) U*`.
pub fn conjugate_diagonal(u: &CMat, d: &[f64]) -> HermitianOperator {
    let n = d.len();
    let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * d[j]);
    HermitianOperator::new(&scaled * u.adjoint()).expect("finite product")
}

/// Random Hermitian matrix with eigenvalue magnitudes in `[lo, hi]` and random signs.
pub fn random_invertible_hermitian(rng: &mut Rng64, n: usize, lo: f64, hi: f64) -> HermitianOperator {
    let u = random_unitary(rng, n);
    let d: Vec<f64> = (0..n)
        .map(|_| {
            let m = rng.random_range(lo..=hi);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    conjugate_diagonal(&u, &d)
}

/// Quintic smoothstep: 0 for `x <= 0`, 1 for `x >= 1`, C^2 in between.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

/// Smooth bump supported in `[a, b]`, equal to 1 at the midpoint.
pub fn bump(t: f64, a: f64, b: f64) -> f64 {
    if t <= a || t >= b {
        return 0.0;
    }
    let x = (t - a) / (b - a);
    (PI * x).sin().powi(4)
}

/// `S(t) = (1 - t) A0 + t A1 + sin(pi t) A2` on `[0, 1]`, with `A0` and `A1`
/// invertible (eigenvalue magnitudes in `[0.2, 2]`) and `|A2| = 1.5`.
pub fn random_sf_path(seed: u64, k: usize, samples: usize) -> Result<PotentialPath> {
    let mut r = rng(seed);
    let a0 = random_invertible_hermitian(&mut r, k, 0.2, 2.0).into_matrix();
    let a1 = random_invertible_hermitian(&mut r, k, 0.2, 2.0).into_matrix();
    let a2 = random_hermitian(&mut r, k, 1.5).into_matrix();
    PotentialPath::from_fn(k, linspace(0.0, 1.0, samples), move |t| {
        let s = (PI * t).sin();
        Mat::from_fn(k, k, |i, j| a0[(i, j)] * (1.0 - t) + a1[(i, j)] * t + a2[(i, j)] * s)
    })?
    .with_compact_set(&[(0.0, 1.0)])
}

/// Scalar `t -> f(t)` as a `1 x 1` path.
pub fn scalar_path(grid: Vec<f64>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<PotentialPath> {
    PotentialPath::diagonal(grid, vec![Arc::new(f)])
}

/// Scalar `S = sinh(G)` with `G` odd, `K = [-1, 1]`.
///
/// On `[0, 1]`, `G` is the cubic with `G(1) = asinh(1)` and `G'(1) = 0.4`;
/// beyond 1 it continues as `asinh(1) + 0.4 (1 - exp(-(t - 1)))`. Hence
/// `|S| >= 1` outside `K` with equality at its endpoints, and
/// `|S' (S +- i)^{-1}| = |G'| <= 0.4` there.
pub fn unit_gap_path() -> PotentialPath {
    let edge = 1f64.asinh();
    let beta = (edge - 0.4) / 2.0;
    let alpha = edge + beta;
    let g = move |t: f64| {
        let a = t.abs();
        let v = if a <= 1.0 { alpha * a - beta * a.powi(3) } else { edge + 0.4 * (1.0 - (-(a - 1.0)).exp()) };
        v * t.signum()
    };
    scalar_path(linspace(-25.0, 25.0, 501), move |t| g(t).sinh())
        .and_then(|p| p.with_compact_set(&[(-1.0, 1.0)]))
        .expect("static path")
}

/// `exp(i theta G)` for Hermitian `G`, from a precomputed eigendecomposition.
fn unitary_flow(eig: &crate::opcore::Eigh, theta: f64) -> CMat {
    eig.reconstruct_complex(|g| c64::new((theta * g).cos(), (theta * g).sin()))
}

/// Random potential on the line, invertible outside `K = intervals`.
///
/// `S(t) = U(t) diag(d_1(t), ..., d_k(t)) U(t)*` with `U(t) = exp(i atan(t) G)`,
/// `|G| = rotation`. Each branch `d_i` has magnitude in `[1, 2]` outside `K`
/// and flips sign across each interval of `K` with probability 1/2, along a
/// quintic smoothstep over a window covering 70% of the interval. Window
/// offsets differ per branch, so branches do not cross zero together. The path grid is `samples`
/// points on `[-span, span]`, refined to spacing 0.05 within 1.5 of `K`.
pub fn random_line_path(
    seed: u64,
    k: usize,
    intervals: &[(f64, f64)],
    span: f64,
    samples: usize,
    rotation: f64,
) -> Result<PotentialPath> {
    let mut r = rng(seed);
    let mut iv = intervals.to_vec();
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let branches: Vec<(f64, Vec<f64>)> = (0..k)
        .map(|_| {
            let m: f64 = r.random_range(1.0..=2.0);
            let mut sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut signs = vec![sign];
            for _ in &iv {
                if r.random_bool(0.5) {
                    sign = -sign;
                }
                signs.push(sign);
            }
            (m, signs)
        })
        .collect();
    let eig = random_hermitian(&mut r, k, rotation).eigh()?;
    let mut offsets = rng(sub_seed(seed, 0x0ff5e7));
    let windows: Vec<Vec<(f64, f64)>> = (0..k)
        .map(|_| {
            iv.iter()
                .map(|&(a, b)| {
                    let lo = a + offsets.random_range(0.0..=0.3) * (b - a);
                    (lo, lo + 0.7 * (b - a))
                })
                .collect()
        })
        .collect();
    let branch = move |i: usize, t: f64| -> f64 {
        let (m, signs) = &branches[i];
        let mut v = signs[0];
        for (j, &(a, b)) in windows[i].iter().enumerate() {
            if t >= b {
                v = signs[j + 1];
            } else if t > a {
                v = signs[j] + (signs[j + 1] - signs[j]) * smoothstep((t - a) / (b - a));
                break;
            } else {
                break;
            }
        }
        m * v
    };
    let mut grid = linspace(-span, span, samples);
    for &(a, b) in &iv {
        let (lo, hi) = ((a - 1.5).max(-span), (b + 1.5).min(span));
        grid.extend(linspace(lo, hi, ((hi - lo) / 0.05).ceil() as usize + 1));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    let path = PotentialPath::from_fn(k, grid, move |t| {
        let u = unitary_flow(&eig, t.atan());
        let d: Vec<f64> = (0..k).map(|i| branch(i, t)).collect();
        conjugate_diagonal(&u, &d).into_matrix()
    })?;
    if iv.is_empty() {
        Ok(path)
    } else {
        path.with_compact_set(&iv)
    }
}

/// Two paths that agree on a collar around a cut point.
#[derive(Clone, Debug)]
pub struct CollarPair {
    pub first: PotentialPath,
    pub second: PotentialPath,
    pub t_cut: f64,
    pub collar: (f64, f64),
}

/// `M2 = (1 - phi) M1 + phi G` with `phi = 0` on the collar `t_cut +- 0.4`
/// and `phi = 1` beyond `t_cut +- 1.4`, where `M1` and `G` are independent
/// [`random_line_path`]s with `K = [-2.5, 2.5]` and `t_cut` is uniform in
/// `[-0.5, 0.5]`.
pub fn collar_compatible_pair(seed: u64, k: usize) -> Result<CollarPair> {
    let mut r = rng(seed);
    let t_cut: f64 = r.random_range(-0.5..=0.5);
    let k_set = [(-2.5, 2.5)];
    let m1 = random_line_path(sub_seed(seed, 1), k, &k_set, 12.0, 121, 0.5)?;
    let g = random_line_path(sub_seed(seed, 2), k, &k_set, 12.0, 121, 0.5)?;
    let (a, b) = (m1.clone(), g);
    let second = PotentialPath::from_fn(k, m1.grid().to_vec(), move |t| {
        let phi = smoothstep((t - t_cut).abs() - 0.4);
        if phi == 0.0 {
            a.raw(t)
        } else {
            let (x, y) = (a.raw(t), b.raw(t));
            Mat::from_fn(k, k, |i, j| x[(i, j)] * (1.0 - phi) + y[(i, j)] * phi)
        }
    })?
    .with_compact_set(&k_set)?;
    Ok(CollarPair { first: m1, second, t_cut, collar: (t_cut - 0.4, t_cut + 0.4) })
}

/// A fibered Callias scenario with two targets per fiber.
#[derive(Clone, Debug)]
pub struct CalliasCase {
    pub family: crate::callias::FiberedFamily,
    /// Random invertible targets, eigenvalue magnitudes in `[0.5, 2]`.
    pub targets: Vec<HermitianOperator>,
    /// `-1` on every fiber.
    pub alt_targets: Vec<HermitianOperator>,
}

/// `fibers` independent [`random_line_path`]s with fiber dimensions uniform
/// in `1..=k_max`, sharing `K`: `intervals` intervals of length 2 centred
/// 3 apart and symmetric about 0.
pub fn random_callias_family(seed: u64, fibers: usize, k_max: usize, intervals: usize) -> Result<CalliasCase> {
    let mut r = rng(seed);
    let (k_set, span) = interval_layout(intervals);
    let mut paths = Vec::with_capacity(fibers);
    let mut targets = Vec::with_capacity(fibers);
    let mut alt_targets = Vec::with_capacity(fibers);
    for i in 0..fibers {
        let k = r.random_range(1..=k_max);
        paths.push(random_line_path(sub_seed(seed, i as u64), k, &k_set, span, 81, 0.5)?);
        targets.push(random_invertible_hermitian(&mut r, k, 0.5, 2.0));
        alt_targets.push(HermitianOperator::scalar(k, -1.0));
    }
    Ok(CalliasCase { family: crate::callias::FiberedFamily::new(paths)?, targets, alt_targets })
}

/// [`random_line_path`] with `K = [-1.5, 1.5]` on `[-10, 10]`, for index computations.
pub fn random_index_path(seed: u64, k: usize) -> Result<PotentialPath> {
    random_line_path(seed, k, &[(-1.5, 1.5)], 10.0, 101, 0.5)
}

/// `bump(t, a, b) R` with `R` a random Hermitian matrix of norm `norm`,
/// sampled on `grid`. Vanishes identically outside `(a, b)`.
pub fn random_bump(seed: u64, k: usize, support: (f64, f64), norm: f64, grid: Vec<f64>) -> Result<PotentialPath> {
    let r = random_hermitian(&mut rng(seed), k, norm).into_matrix();
    let (a, b) = support;
    PotentialPath::from_fn(k, grid, move |t| {
        let w = bump(t, a, b);
        Mat::from_fn(k, k, |i, j| r[(i, j)] * w)
    })
}

/// [`random_bump`] with support a random subinterval of `within` of length
/// at least a fifth of it, and norm uniform in `[0.5, 3]`.
pub fn seeded_bump(seed: u64, k: usize, within: (f64, f64), grid: Vec<f64>) -> Result<PotentialPath> {
    let mut r = rng(seed);
    let (lo, hi) = within;
    let len = hi - lo;
    let a = r.random_range(lo..lo + 0.8 * len);
    let b = r.random_range(a + 0.2 * len..=hi);
    let norm = r.random_range(0.5..=3.0);
    random_bump(sub_seed(seed, 1), k, (a, b), norm, grid)
}

/// Intervals of length 2 with centres 3 apart, symmetric about 0, and a
/// half-span that leaves 8 units on either side.
pub fn interval_layout(intervals: usize) -> (Vec<(f64, f64)>, f64) {
    let centre = (intervals as f64 - 1.0).max(0.0) / 2.0;
    let k_set = (0..intervals).map(|j| 3.0 * (j as f64 - centre)).map(|c| (c - 1.0, c + 1.0)).collect();
    (k_set, 8.0 + 3.0 * centre)
}
