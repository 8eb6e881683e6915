//! Operator inequalities and compactness statements for unbounded
//! self-adjoint operators, checked on seeded random matrices and on
//! truncation towers.
//!
//! Compactness has no finite-dimensional meaning of its own. Every
//! compactness statement here is tested through a proxy: norms of tail
//! blocks along a tower of nested compressions must decay at an explicit
//! rate. Reports carry [`COMPACTNESS_PROXY`] to say so.
//!
//! Negative controls (a non-compact template, `eps >= 1/2`, a singular
//! operator for the hard step) are rejected as precondition errors, never
//! reported as failed inequalities.

use std::f64::consts::FRAC_PI_2;

use faer::{c64, Mat};
use rand::Rng;

use crate::error::{Error, Result};
use crate::opcore::tower::tail_projection;
use crate::opcore::{
    apply_complex_function, bounded_transform, inv_sqrt_positive, linalg, sqrt_positive, CMat, HermitianOperator,
    Template, TruncationTower,
};
use crate::scenarios::{gaussian_c64, rng, sub_seed, Rng64};

pub const COMPACTNESS_PROXY: &str = "compactness proxy: tail norms along a truncation tower";

/// Minimal eigenvalue accepted as positive definite.
pub const POSITIVE_MIN_EIG: f64 = 1e-8;

const I: c64 = c64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Structure {
    Dense,
    /// Only `r` eigenvalues are drawn from the envelope, the rest are zero.
    FiniteRank(usize),
    /// Eigenbasis is two brick layers of nearest-neighbour rotations with
    /// angles at most `(pi/4) exp(-rate)`, so the matrix is banded and its
    /// off-diagonal weight shrinks with `rate`.
    BandedDecay(f64),
}

/// Recipe for a seeded random Hermitian matrix with prescribed spectrum range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpec {
    pub seed: u64,
    /// Inclusive dimension range; the dimension is drawn from it.
    pub dims: (usize, usize),
    /// Eigenvalues are drawn uniformly from `[lo, hi]`.
    pub envelope: (f64, f64),
    pub structure: Structure,
}

impl RandomSpec {
    pub fn new(seed: u64, dim: usize, envelope: (f64, f64), structure: Structure) -> Self {
        Self { seed, dims: (dim, dim), envelope, structure }
    }
}

/// Builds `Q diag(d) Q*` with `Q` from the QR factorization of a seeded
/// Gaussian matrix (phases of `R` divided out, so `Q` is Haar distributed).
pub fn random_hermitian(spec: &RandomSpec) -> Result<HermitianOperator> {
    let (dlo, dhi) = spec.dims;
    let (lo, hi) = spec.envelope;
    if dlo == 0 || dlo > dhi || !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!("invalid random spec {spec:?}")));
    }
    let mut r = rng(spec.seed);
    let n = r.random_range(dlo..=dhi);
    let mut d: Vec<f64> = (0..n).map(|_| if lo == hi { lo } else { r.random_range(lo..=hi) }).collect();
    let q = match spec.structure {
        Structure::Dense => haar_unitary(&mut r, n),
        Structure::FiniteRank(rank) => {
            d.iter_mut().skip(rank).for_each(|x| *x = 0.0);
            haar_unitary(&mut r, n)
        }
        Structure::BandedDecay(rate) => {
            if !(rate >= 0.0) {
                return Err(Error::InvalidInput(format!("decay rate must be nonnegative, got {rate}")));
            }
            brick_unitary(&mut r, n, FRAC_PI_2 / 2.0 * (-rate).exp())
        }
    };
    let scaled = Mat::from_fn(n, n, |i, j| q[(i, j)] * d[j]);
    HermitianOperator::new(&scaled * q.adjoint())
}

fn haar_unitary(r: &mut Rng64, n: usize) -> CMat {
    let g = Mat::from_fn(n, n, |_, _| gaussian_c64(r));
    let qr = g.qr();
    let q = qr.compute_Q();
    let rr = qr.R();
    Mat::from_fn(n, n, |i, j| {
        let p = rr[(j, j)];
        let a = p.norm();
        q[(i, j)] * if a > 0.0 { p / a } else { c64::new(1.0, 0.0) }
    })
}

fn brick_unitary(r: &mut Rng64, n: usize, max_angle: f64) -> CMat {
    let mut u = linalg::identity(n);
    for start in [0usize, 1] {
        let mut layer = linalg::identity(n);
        for k in (start..n.saturating_sub(1)).step_by(2) {
            let th = if max_angle > 0.0 { r.random_range(-max_angle..=max_angle) } else { 0.0 };
            let (s, c) = th.sin_cos();
            layer[(k, k)] = c64::new(c, 0.0);
            layer[(k + 1, k + 1)] = c64::new(c, 0.0);
            layer[(k, k + 1)] = c64::new(-s, 0.0);
            layer[(k + 1, k)] = c64::new(s, 0.0);
        }
        u = &layer * &u;
    }
    u
}

fn norm(m: &CMat) -> f64 {
    linalg::opnorm(m.as_ref())
}

fn mat(h: &HermitianOperator) -> CMat {
    h.entries().to_owned()
}

fn shifted(h: &HermitianOperator, s: c64) -> CMat {
    linalg::shift(h.entries(), s)
}

fn inverse(m: &CMat) -> Result<CMat> {
    linalg::inverse(m.as_ref())
}

fn same_dim(a: &HermitianOperator, b: &HermitianOperator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

fn min_eig(h: &HermitianOperator) -> Result<f64> {
    Ok(h.eigenvalues()?.first().copied().unwrap_or(f64::INFINITY))
}

fn positive_definite(t: &HermitianOperator) -> Result<()> {
    let lo = min_eig(t)?;
    if lo < POSITIVE_MIN_EIG {
        return Err(Error::InvalidInput(format!("T is not positive definite (min eigenvalue {lo:.3e})")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Compact operators against strongly convergent projections.

#[derive(Clone, Debug, PartialEq)]
pub struct CompactnessReport {
    pub dims: Vec<usize>,
    /// Size of the reference compression standing in for the infinite template.
    pub reference_dim: usize,
    /// `|K (1 - Pi_n)|`.
    pub right_tails: Vec<f64>,
    /// `|(1 - Pi_n) K|`.
    pub left_tails: Vec<f64>,
    pub monotone: bool,
    pub below_threshold: bool,
    pub holds: bool,
    pub note: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompactnessOptions {
    /// Reference size as a multiple of the top tower dimension.
    pub reference_factor: usize,
    pub threshold: f64,
    /// Tails at or below this are treated as zero.
    pub floor: f64,
}

impl Default for CompactnessOptions {
    fn default() -> Self {
        Self { reference_factor: 2, threshold: 1e-6, floor: 1e-13 }
    }
}

/// Norms of `K (1 - Pi_n)` and `(1 - Pi_n) K` for the coordinate
/// projections `Pi_n` at the tower sizes.
///
/// Tails that do not at least halve between the first and last size reject
/// the template as not compact. `holds` requires nonincreasing tails that
/// end below `threshold`.
pub fn projection_convergence(dims: &[usize], k: &Template, opts: &CompactnessOptions) -> Result<CompactnessReport> {
    if dims.is_empty() || dims[0] == 0 || dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!("dims must be positive and strictly increasing: {dims:?}")));
    }
    let top = *dims.last().expect("nonempty");
    let reference_dim = top * opts.reference_factor.max(2);
    let km = mat(&k.compress(reference_dim)?);
    let mut right_tails = Vec::with_capacity(dims.len());
    let mut left_tails = Vec::with_capacity(dims.len());
    for &n in dims {
        let tail = tail_projection(reference_dim, n);
        right_tails.push(norm(&(&km * &tail)));
        left_tails.push(norm(&(&tail * &km)));
    }
    let decays = |v: &[f64]| {
        let (first, last) = (v[0], *v.last().expect("nonempty"));
        last <= opts.floor || last <= first / 2.0
    };
    if !decays(&right_tails) || !decays(&left_tails) {
        return Err(Error::CompactTemplateInvalid(format!(
            "tails do not decay along the tower: right {right_tails:?}, left {left_tails:?}"
        )));
    }
    let nonincreasing = |v: &[f64]| v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + opts.floor);
    let monotone = nonincreasing(&right_tails) && nonincreasing(&left_tails);
    let below_threshold =
        *right_tails.last().expect("nonempty") < opts.threshold && *left_tails.last().expect("nonempty") < opts.threshold;
    Ok(CompactnessReport {
        dims: dims.to_vec(),
        reference_dim,
        right_tails,
        left_tails,
        monotone,
        below_threshold,
        holds: monotone && below_threshold,
        note: COMPACTNESS_PROXY,
    })
}

// ---------------------------------------------------------------------------
// Interpolation and conjugation inequalities.

#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationReport {
    /// `|T^{-1/2} S T^{-1/2}|`.
    pub lhs: f64,
    /// `|S T^{-1}|`.
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// `|T S T^{-1}|` and `|T^{-1} S T|`.
    pub conjugated: (f64, f64),
    pub conjugated_equal: bool,
    /// `|(T^{-1} S T)* - T S T^{-1}|` relative to `|T S T^{-1}|`.
    pub adjoint_residual: f64,
    /// `|T^{-1}|`. The inequality is homogeneous of degree -1 in `T`, so
    /// it is checked without normalizing `T` to `|T^{-1}| <= 1`.
    pub inverse_norm: f64,
}

/// `|T^{-1/2} S T^{-1/2}| <= |S T^{-1}|` for positive definite `T` and
/// Hermitian `S`, plus the conjugation identity `|T S T^{-1}| = |T^{-1} S T|`.
pub fn interpolation_inequality(t: &HermitianOperator, s: &HermitianOperator) -> Result<InterpolationReport> {
    same_dim(t, s)?;
    positive_definite(t)?;
    let t_inv_half = mat(&inv_sqrt_positive(t, POSITIVE_MIN_EIG)?);
    let t_inv = inverse(&mat(t))?;
    let (tm, sm) = (mat(t), mat(s));
    let lhs = norm(&(&t_inv_half * &sm * &t_inv_half));
    let rhs = norm(&(&sm * &t_inv));
    let slack = 1e-10 * rhs.max(1.0);
    let left = &tm * &sm * &t_inv;
    let right = &t_inv * &sm * &tm;
    let conjugated = (norm(&left), norm(&right));
    let scale = conjugated.0.max(conjugated.1).max(f64::MIN_POSITIVE);
    let adjoint_residual = norm(&(right.adjoint().to_owned() - &left)) / scale.max(1.0);
    Ok(InterpolationReport {
        lhs,
        rhs,
        slack,
        holds: lhs <= rhs + slack,
        conjugated,
        conjugated_equal: (conjugated.0 - conjugated.1).abs() <= 1e-9 * scale.max(1.0),
        adjoint_residual,
        inverse_norm: norm(&t_inv),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationReport {
    pub norm: f64,
    /// `|T^{-1/2} F T^{1/2}|` and `|T^{1/2} F T^{-1/2}|`.
    pub conjugated: (f64, f64),
    pub slack: f64,
    pub holds: bool,
    pub conjugated_equal: bool,
}

/// `|F| <= |T^{-1/2} F T^{1/2}| = |T^{1/2} F T^{-1/2}|` for positive definite
/// `T` and Hermitian `F`.
pub fn conjugation_inequality(t: &HermitianOperator, f: &HermitianOperator) -> Result<ConjugationReport> {
    same_dim(t, f)?;
    positive_definite(t)?;
    let half = mat(&sqrt_positive(t, POSITIVE_MIN_EIG)?);
    let inv_half = mat(&inv_sqrt_positive(t, POSITIVE_MIN_EIG)?);
    let fm = mat(f);
    let fnorm = norm(&fm);
    let conjugated = (norm(&(&inv_half * &fm * &half)), norm(&(&half * &fm * &inv_half)));
    let scale = conjugated.0.max(conjugated.1).max(1.0);
    let slack = 1e-10 * scale;
    Ok(ConjugationReport {
        norm: fnorm,
        conjugated,
        slack,
        holds: fnorm <= conjugated.0 + slack,
        conjugated_equal: (conjugated.0 - conjugated.1).abs() <= 1e-9 * scale,
    })
}

// ---------------------------------------------------------------------------
// Continuity of the bounded transform.

#[derive(Clone, Debug, PartialEq)]
pub struct TransformContinuityReport {
    pub eps: f64,
    /// `|(T - T_n)(T + i)^{-1}|` and `|(T + i)^{-1}(T - T_n)|`.
    pub hypothesis: (f64, f64),
    /// `|F_T - F_{T_n}|`.
    pub difference: f64,
    /// `eps (1 + (1 + eps)/(1 - eps))`, the sharper intermediate bound.
    pub intermediate_bound: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `|F_T - F_{T_n}| <= 4 eps` whenever both resolvent-weighted differences
/// are at most `eps < 1/2`, with `F_T = T (1 + T^2)^{-1/2}`.
pub fn bounded_transform_continuity(
    t: &HermitianOperator,
    tn: &HermitianOperator,
    eps: f64,
) -> Result<TransformContinuityReport> {
    same_dim(t, tn)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::HypothesisUnmet(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    let res = inverse(&shifted(t, I))?;
    let diff = mat(t) - mat(tn);
    let hypothesis = (norm(&(&diff * &res)), norm(&(&res * &diff)));
    if hypothesis.0 > eps || hypothesis.1 > eps {
        return Err(Error::HypothesisUnmet(format!(
            "resolvent-weighted differences {:.3e}, {:.3e} exceed eps = {eps}",
            hypothesis.0, hypothesis.1
        )));
    }
    let difference = bounded_transform(t)?.try_sub(&bounded_transform(tn)?)?.spectral_norm()?;
    let bound = 4.0 * eps;
    Ok(TransformContinuityReport {
        eps,
        hypothesis,
        difference,
        intermediate_bound: eps * (1.0 + (1.0 + eps) / (1.0 - eps)),
        bound,
        holds: difference <= bound,
    })
}

// ---------------------------------------------------------------------------
// Relative bounds from relative compactness.

pub const SCHEDULE_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleEntry {
    pub eps: f64,
    /// Minimal `n >= 1` with `|R (T - i n)^{-1}| < eps`.
    pub n: u64,
    pub resolvent_norm: f64,
    /// `C_eps = eps n`.
    pub constant: f64,
    /// Largest `|R psi| / (eps |T psi| + C_eps |psi|)` over the test vectors.
    pub worst_ratio: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleReport {
    pub entries: Vec<ScheduleEntry>,
    pub vectors: usize,
    pub holds: bool,
}

fn weighted_resolvent_norm(t: &HermitianOperator, r: &CMat, n: f64) -> Result<f64> {
    Ok(norm(&(r * inverse(&shifted(t, -I * n))?)))
}

/// Smallest integer `n` with `|R (T - i n)^{-1}| < eps`.
///
/// The norm squared is `|R (T^2 + n^2)^{-1} R*|`, nonincreasing in `n`,
/// so doubling followed by bisection finds the minimum.
pub fn minimal_shift(t: &HermitianOperator, r: &HermitianOperator, eps: f64) -> Result<(u64, f64)> {
    same_dim(t, r)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let rm = mat(r);
    let at = |n: u64| weighted_resolvent_norm(t, &rm, n as f64);
    let first = at(1)?;
    if first < eps {
        return Ok((1, first));
    }
    let (mut lo, mut hi) = (1u64, 2u64);
    let mut hi_norm = at(hi)?;
    while hi_norm >= eps {
        if hi >= SCHEDULE_CAP {
            return Err(Error::NotRelativelyCompact(format!(
                "|R (T - i n)^{{-1}}| = {hi_norm:.3e} >= {eps} at the cap n = {SCHEDULE_CAP}"
            )));
        }
        lo = hi;
        hi = (hi * 2).min(SCHEDULE_CAP);
        hi_norm = at(hi)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let v = at(mid)?;
        if v < eps {
            hi = mid;
            hi_norm = v;
        } else {
            lo = mid;
        }
    }
    Ok((hi, hi_norm))
}

/// For each `eps`, finds the minimal shift `n`, sets `C_eps = eps n` and
/// checks `|R psi| <= eps |T psi| + C_eps |psi|` on `vectors` seeded
/// Gaussian test vectors.
pub fn relative_bound_schedule(
    t: &HermitianOperator,
    r: &HermitianOperator,
    eps_list: &[f64],
    vectors: usize,
    seed: u64,
) -> Result<ScheduleReport> {
    same_dim(t, r)?;
    let n = t.dim();
    let mut g = rng(seed);
    let psis: Vec<CMat> = (0..vectors).map(|_| Mat::from_fn(n, 1, |_, _| gaussian_c64(&mut g))).collect();
    let (tm, rm) = (mat(t), mat(r));
    let mut entries = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let (shift, resolvent_norm) = minimal_shift(t, r, eps)?;
        let constant = eps * shift as f64;
        let mut worst_ratio = 0.0f64;
        let mut holds = true;
        for psi in &psis {
            let lhs = linalg::frobenius((&rm * psi).as_ref());
            let rhs = eps * linalg::frobenius((&tm * psi).as_ref()) + constant * linalg::frobenius(psi.as_ref());
            holds &= lhs <= rhs * (1.0 + 1e-12);
            if rhs > 0.0 {
                worst_ratio = worst_ratio.max(lhs / rhs);
            }
        }
        entries.push(ScheduleEntry { eps, n: shift, resolvent_norm, constant, worst_ratio, holds });
    }
    Ok(ScheduleReport { holds: entries.iter().all(|e| e.holds), entries, vectors })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerScheduleReport {
    pub dims: Vec<usize>,
    /// Number of singular values of `R (T - i)^{-1}` above the proxy threshold.
    pub counts: Vec<usize>,
    pub schedules: Vec<ScheduleReport>,
    pub holds: bool,
    pub note: &'static str,
}

/// Relative bound schedule at every tower size, preceded by a
/// dimension-scaling check: the number of singular values of
/// `R (T - i)^{-1}` above `proxy_threshold` must not grow between the two
/// largest sizes.
pub fn relative_bound_tower(
    tower: &TruncationTower,
    eps_list: &[f64],
    vectors: usize,
    proxy_threshold: f64,
    seed: u64,
) -> Result<TowerScheduleReport> {
    let instances = tower.instances()?;
    let mut counts = Vec::with_capacity(instances.len());
    for inst in &instances {
        let m = &mat(&inst.perturbation) * inverse(&shifted(&inst.operator, -I))?;
        counts.push(linalg::singular_values(m.as_ref())?.iter().filter(|&&s| s > proxy_threshold).count());
    }
    if let [.., a, b] = counts[..] {
        if b > a {
            return Err(Error::NotRelativelyCompact(format!(
                "singular values of R (T - i)^{{-1}} above {proxy_threshold} keep growing with dimension: {counts:?}"
            )));
        }
    }
    let schedules = instances
        .iter()
        .enumerate()
        .map(|(j, inst)| relative_bound_schedule(&inst.operator, &inst.perturbation, eps_list, vectors, sub_seed(seed, j as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TowerScheduleReport {
        dims: tower.dims().to_vec(),
        counts,
        holds: schedules.iter().all(|s| s.holds),
        schedules,
        note: COMPACTNESS_PROXY,
    })
}

// ---------------------------------------------------------------------------
// Compact differences of functions of T and T + R.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TailFunction {
    /// `x (1 + x^2)^{-1/2}`.
    BoundedTransform,
    /// `(x + i)^{-1}`.
    ResolventPlus,
    /// `(x - i)^{-1}`.
    ResolventMinus,
    /// Indicator of `(0, inf)`; needs both operators invertible.
    HardStep,
}

impl TailFunction {
    pub const ALL: [TailFunction; 4] =
        [TailFunction::BoundedTransform, TailFunction::ResolventPlus, TailFunction::ResolventMinus, TailFunction::HardStep];

    pub fn name(self) -> &'static str {
        match self {
            TailFunction::BoundedTransform => "bounded_transform",
            TailFunction::ResolventPlus => "resolvent_plus",
            TailFunction::ResolventMinus => "resolvent_minus",
            TailFunction::HardStep => "hard_step",
        }
    }

    fn eval(self, x: f64) -> c64 {
        match self {
            TailFunction::BoundedTransform => c64::new(x / (1.0 + x * x).sqrt(), 0.0),
            TailFunction::ResolventPlus => c64::new(1.0, 0.0) / c64::new(x, 1.0),
            TailFunction::ResolventMinus => c64::new(1.0, 0.0) / c64::new(x, -1.0),
            TailFunction::HardStep => c64::new(if x > 0.0 { 1.0 } else { 0.0 }, 0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailOptions {
    /// Required top-size tail norm.
    pub tail_bound: f64,
    /// Required shrink factor of the tail norm per tower step.
    pub decay_factor: f64,
    /// Tail norms at or below this count as zero.
    pub floor: f64,
    /// Allowed growth of `sigma_j` between half and top size.
    pub sv_slack: f64,
    /// Spectral gap required of `T` and `T + R` for the hard step.
    pub gap: f64,
    /// Indices below this are exempt from the singular value check.
    pub structural_rank: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { tail_bound: 1e-5, decay_factor: 2.0, floor: 1e-13, sv_slack: 1e-8, gap: 1e-3, structural_rank: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    pub function: TailFunction,
    pub dims: Vec<usize>,
    /// `|(f(T + R) - f(T)) Pi_tail|` with `Pi_tail` the coordinates `>= n/2`.
    pub tail_norms: Vec<f64>,
    pub decays: bool,
    pub below_bound: bool,
    /// Largest `sigma_j(top) - sigma_j(previous)` over `j >= structural_rank`.
    pub sv_growth: f64,
    pub sv_ok: bool,
    /// Largest resolvent identity residual over the tower (resolvent legs only).
    pub resolvent_residual: Option<f64>,
    pub holds: bool,
    pub note: &'static str,
}

/// Residual of `(T + R + z)^{-1} - (T + z)^{-1} = -(T + R + z)^{-1} R (T + z)^{-1}`
/// for `z = +-i`, all inverses by LU.
pub fn resolvent_identity_residual(t: &HermitianOperator, r: &HermitianOperator) -> Result<f64> {
    same_dim(t, r)?;
    let tr = t.try_add(r)?;
    let rm = mat(r);
    let mut worst = 0.0f64;
    for z in [I, -I] {
        let a = inverse(&shifted(&tr, z))?;
        let b = inverse(&shifted(t, z))?;
        let rhs = &a * &rm * &b;
        worst = worst.max(norm(&(&a - &b + rhs)));
    }
    Ok(worst)
}

fn function_difference(t: &HermitianOperator, r: &HermitianOperator, f: TailFunction, gap: f64) -> Result<CMat> {
    let tr = t.try_add(r)?;
    if f == TailFunction::HardStep {
        for h in [t, &tr] {
            let m = h.min_abs_eigenvalue()?;
            if m < gap {
                return Err(Error::NotInvertible { min_abs_eig: m, tol: gap });
            }
        }
    }
    Ok(apply_complex_function(&tr, |x| f.eval(x))? - apply_complex_function(t, |x| f.eval(x))?)
}

/// Tail behaviour of `f(T + R) - f(T)` along a tower.
///
/// Passes when the tail norms shrink by `decay_factor` per step (or sit
/// below `floor`), the top tail is below `tail_bound`, singular values
/// beyond the structural rank do not grow from one size to the next, and
/// for resolvents the resolvent identity holds to `1e-12`.
pub fn perturbation_tail_decay(tower: &TruncationTower, f: TailFunction, opts: &TailOptions) -> Result<TailReport> {
    let instances = tower.instances()?;
    let mut tail_norms = Vec::with_capacity(instances.len());
    let mut svs = Vec::with_capacity(instances.len());
    let mut residual: Option<f64> = None;
    for inst in &instances {
        let d = function_difference(&inst.operator, &inst.perturbation, f, opts.gap)?;
        let n = inst.dim;
        tail_norms.push(norm(&(&d * tail_projection(n, n / 2))));
        svs.push(linalg::singular_values(d.as_ref())?);
        if matches!(f, TailFunction::ResolventPlus | TailFunction::ResolventMinus) {
            let r = resolvent_identity_residual(&inst.operator, &inst.perturbation)?;
            residual = Some(residual.map_or(r, |w| w.max(r)));
        }
    }
    let decays = tail_norms.windows(2).all(|w| w[1] <= opts.floor || w[1] <= w[0] / opts.decay_factor);
    let below_bound = *tail_norms.last().expect("tower is nonempty") < opts.tail_bound;
    let mut sv_growth = f64::NEG_INFINITY;
    for w in svs.windows(2) {
        for j in opts.structural_rank..w[0].len() {
            sv_growth = sv_growth.max(w[1][j] - w[0][j]);
        }
    }
    let sv_growth = if sv_growth.is_finite() { sv_growth } else { 0.0 };
    let sv_ok = sv_growth <= opts.sv_slack;
    let residual_ok = residual.map_or(true, |r| r <= 1e-12);
    Ok(TailReport {
        function: f,
        dims: tower.dims().to_vec(),
        decays,
        below_bound,
        sv_growth,
        sv_ok,
        resolvent_residual: residual,
        holds: decays && below_bound && sv_ok && residual_ok,
        tail_norms,
        note: COMPACTNESS_PROXY,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceIntegralReport {
    pub nodes: usize,
    /// `|T (1 + (T + R)^2)^{-1/2} - T (1 + T^2)^{-1/2}|` by eigendecomposition.
    pub direct_norm: f64,
    /// Norm of the difference between the quadrature and the direct value.
    pub residual: f64,
}

/// Evaluates
/// `T (1 + (T+R)^2)^{-1/2} - T (1 + T^2)^{-1/2}
///   = -(1/pi) int_0^inf s^{-1/2} T (1 + s + T^2)^{-1} (T R + R (T + R)) (1 + s + (T + R)^2)^{-1} ds`
/// by quadrature and compares it with the spectral value.
///
/// With `s = tan^2 u` the integral becomes
/// `-(2/pi) int_0^{pi/2} c^2 T (1 + c^2 T^2)^{-1} M (1 + c^2 (T+R)^2)^{-1} du`, `c = cos u`,
/// a smooth even periodic integrand on which the midpoint rule converges spectrally.
pub fn difference_integral(t: &HermitianOperator, r: &HermitianOperator, nodes: usize) -> Result<DifferenceIntegralReport> {
    same_dim(t, r)?;
    if nodes < 8 {
        return Err(Error::InvalidInput(format!("quadrature needs at least 8 nodes, got {nodes}")));
    }
    let n = t.dim();
    let tr = t.try_add(r)?;
    let (tm, rm, trm) = (mat(t), mat(r), mat(&tr));
    let t2 = &tm * &tm;
    let tr2 = &trm * &trm;
    let middle = &tm * &rm + &rm * &trm;
    let step = FRAC_PI_2 / nodes as f64;
    let mut acc = linalg::zeros(n, n);
    for j in 0..nodes {
        let c2 = ((j as f64 + 0.5) * step).cos().powi(2);
        let a = inverse(&linalg::shift(linalg::scale(t2.as_ref(), c2).as_ref(), c64::new(1.0, 0.0)))?;
        let b = inverse(&linalg::shift(linalg::scale(tr2.as_ref(), c2).as_ref(), c64::new(1.0, 0.0)))?;
        acc += linalg::scale((&tm * &a * &middle * &b).as_ref(), c2);
    }
    let quadrature = linalg::scale(acc.as_ref(), -step / FRAC_PI_2);
    let weight = |h: &HermitianOperator| -> Result<CMat> {
        let w = apply_complex_function(h, |x| c64::new(1.0 / (1.0 + x * x).sqrt(), 0.0))?;
        Ok(&tm * w)
    };
    let direct = weight(&tr)? - weight(t)?;
    Ok(DifferenceIntegralReport { nodes, direct_norm: norm(&direct), residual: norm(&(&quadrature - &direct)) })
}

// ---------------------------------------------------------------------------
// Seeded property suites.

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteSummary {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    /// Trials rejected at the precondition stage.
    pub skipped: usize,
    /// Largest `lhs - rhs` over passing and failing trials (negative when all pass with room).
    pub worst_margin: f64,
    pub failures: Vec<u64>,
}

impl SuiteSummary {
    fn new(name: String) -> Self {
        Self { name, trials: 0, passed: 0, skipped: 0, worst_margin: f64::NEG_INFINITY, failures: Vec::new() }
    }

    fn record(&mut self, seed: u64, outcome: Result<(bool, f64)>) -> Result<()> {
        self.trials += 1;
        match outcome {
            Ok((ok, margin)) => {
                self.worst_margin = self.worst_margin.max(margin);
                if ok {
                    self.passed += 1;
                } else {
                    self.failures.push(seed);
                }
                Ok(())
            }
            Err(e) if e.is_precondition() => {
                self.skipped += 1;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.passed + self.skipped == self.trials
    }
}

pub const MAX_TRIAL_DIM: usize = 16;

fn pick_structure(r: &mut Rng64, n: usize) -> Structure {
    match r.random_range(0..3) {
        0 => Structure::Dense,
        1 => Structure::FiniteRank(r.random_range(1..=n)),
        _ => Structure::BandedDecay(r.random_range(0.0..2.0)),
    }
}

/// Positive definite `T` and Hermitian `S` of a common random size `<= 16`.
pub fn positive_pair(seed: u64) -> Result<(HermitianOperator, HermitianOperator)> {
    let mut r = rng(seed);
    let n = r.random_range(1..=MAX_TRIAL_DIM);
    let hi = 10f64.powf(r.random_range(0.0..2.0));
    let t = random_hermitian(&RandomSpec::new(sub_seed(seed, 0), n, (0.1, hi), Structure::Dense))?;
    let s_structure = pick_structure(&mut r, n);
    let s = random_hermitian(&RandomSpec::new(sub_seed(seed, 1), n, (-5.0, 5.0), s_structure))?;
    Ok((t, s))
}

/// `T` with spectrum in `[-10, 10]` and `T_n = T + s P` with `s` chosen so
/// that the larger resolvent-weighted difference equals `eps` up to `1e-10`.
pub fn transform_pair(seed: u64, eps: f64) -> Result<(HermitianOperator, HermitianOperator)> {
    let mut r = rng(seed);
    let n = r.random_range(1..=MAX_TRIAL_DIM);
    let t = random_hermitian(&RandomSpec::new(sub_seed(seed, 0), n, (-10.0, 10.0), Structure::Dense))?;
    let p_structure = pick_structure(&mut r, n);
    let p = random_hermitian(&RandomSpec::new(sub_seed(seed, 1), n, (0.5, 1.0), p_structure))?;
    let res = inverse(&shifted(&t, I))?;
    let pm = mat(&p);
    let h = norm(&(&pm * &res)).max(norm(&(&res * &pm)));
    let s = if h > 0.0 { eps / h * (1.0 - 1e-10) } else { 0.0 };
    let sign = if r.random_bool(0.5) { 1.0 } else { -1.0 };
    Ok((t.clone(), t.combine(1.0, &p, sign * s)?))
}

/// Unbounded-looking `T` with spectrum in `[-50, 50]` and finite-rank `R`.
pub fn relative_pair(seed: u64) -> Result<(HermitianOperator, HermitianOperator)> {
    let mut r = rng(seed);
    let n = r.random_range(1..=MAX_TRIAL_DIM);
    let rank = r.random_range(1..=n.min(4));
    let t = random_hermitian(&RandomSpec::new(sub_seed(seed, 0), n, (-50.0, 50.0), Structure::Dense))?;
    let rr = random_hermitian(&RandomSpec::new(sub_seed(seed, 1), n, (-3.0, 3.0), Structure::FiniteRank(rank)))?;
    Ok((t, rr))
}

pub fn interpolation_suite(base_seed: u64, trials: usize) -> Result<SuiteSummary> {
    let mut out = SuiteSummary::new("interpolation_inequality".into());
    for j in 0..trials {
        let seed = sub_seed(base_seed, j as u64);
        let outcome = positive_pair(seed).and_then(|(t, s)| interpolation_inequality(&t, &s)).map(|rep| {
            let ok = rep.holds && rep.conjugated_equal && rep.adjoint_residual <= 1e-10;
            (ok, rep.lhs - rep.rhs)
        });
        out.record(seed, outcome)?;
    }
    Ok(out)
}

pub fn conjugation_suite(base_seed: u64, trials: usize) -> Result<SuiteSummary> {
    let mut out = SuiteSummary::new("conjugation_inequality".into());
    for j in 0..trials {
        let seed = sub_seed(base_seed, j as u64);
        let outcome = positive_pair(seed)
            .and_then(|(t, f)| {
                let scale = f.spectral_norm()?.max(f64::MIN_POSITIVE);
                conjugation_inequality(&t, &f.scaled(1.0 / scale))
            })
            .map(|rep| (rep.holds && rep.conjugated_equal, rep.norm - rep.conjugated.0));
        out.record(seed, outcome)?;
    }
    Ok(out)
}

pub fn transform_continuity_suite(base_seed: u64, trials: usize, eps: f64) -> Result<SuiteSummary> {
    let mut out = SuiteSummary::new(format!("bounded_transform_continuity eps={eps}"));
    for j in 0..trials {
        let seed = sub_seed(base_seed, j as u64);
        let outcome = transform_pair(seed, eps)
            .and_then(|(t, tn)| bounded_transform_continuity(&t, &tn, eps))
            .map(|rep| (rep.holds, rep.difference - rep.bound));
        out.record(seed, outcome)?;
    }
    Ok(out)
}

pub fn relative_bound_suite(base_seed: u64, trials: usize, eps_list: &[f64], vectors: usize) -> Result<SuiteSummary> {
    let mut out = SuiteSummary::new("relative_bound_schedule".into());
    for j in 0..trials {
        let seed = sub_seed(base_seed, j as u64);
        let outcome = relative_pair(seed)
            .and_then(|(t, r)| relative_bound_schedule(&t, &r, eps_list, vectors, sub_seed(seed, 2)))
            .map(|rep| {
                let worst = rep.entries.iter().map(|e| e.worst_ratio).fold(0.0, f64::max);
                (rep.holds, worst - 1.0)
            });
        out.record(seed, outcome)?;
    }
    Ok(out)
}

/// Tower used for the tail suites: `T = diag(1, -1, 2, -2, ...)` and a
/// rank-two perturbation with exponentially localized profile.
pub fn default_tail_tower(dims: Vec<usize>) -> Result<TruncationTower> {
    TruncationTower::from_templates(
        dims,
        Template::Alternating { scale: 1.0 },
        Template::DecayingRank { coeffs: vec![1.5, -0.7], rate: 1.0 },
    )
}
