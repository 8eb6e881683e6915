//! Cut-and-paste of potentials on the line and index-preserving surgeries.
//!
//! Two paths that agree on a collar around `t_cut` can exchange their right
//! halves; the four indices then satisfy `ind1 + ind2 = ind3 + ind4`.
//! [`cylindrical_end`] makes a potential constant outside an interval and
//! [`collar_flatten`] replaces it by a fixed operator deep inside `K`; both
//! leave the index unchanged. [`cylinder_reduction`] composes the two with
//! repeated cuts against a constant path, splitting the index into one
//! contribution per boundary point of `K`.

use std::sync::Arc;

use faer::Mat;

use crate::dirac1d::{fredholm_constants, solve_index, GridSpec, IndexOptions};
use crate::error::{Error, Result};
use crate::opcore::{linalg, positive_projection, CMat, HermitianOperator, Tolerances};
use crate::relindex::rel_index_of;
use crate::scenarios::smoothstep;
use crate::specflow::{endpoint_identity, linspace, PotentialPath};

/// Maximal sample deviation allowed on a collar.
pub const COLLAR_TOL: f64 = 1e-12;

/// Samples per ramp when checking invertibility of interpolants.
const RAMP_SAMPLES: usize = 65;

/// Smooth cutoff equal to 1 on `[lower, upper]` and 0 outside
/// `[lower - width, upper + width]`, with quintic smoothstep ramps.
/// `lower` may be `-inf` and `upper` may be `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurgeryProfile {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

impl SurgeryProfile {
    pub fn new(lower: f64, upper: f64, width: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper || !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!("bad profile: [{lower}, {upper}], width {width}")));
        }
        Ok(Self { lower, upper, width })
    }

    /// The collar profile in the outward coordinate `r`: 1 for `r <= -eps`,
    /// 0 for `r >= 0`.
    pub fn collar(eps: f64) -> Result<Self> {
        Self::new(f64::NEG_INFINITY, -eps, eps)
    }

    pub fn value(&self, t: f64) -> f64 {
        if t < self.lower {
            1.0 - smoothstep((self.lower - t) / self.width)
        } else if t > self.upper {
            1.0 - smoothstep((t - self.upper) / self.width)
        } else {
            1.0
        }
    }
}

/// Clips a union of intervals to `[lo, hi]`, dropping empty pieces.
fn clip(intervals: &[(f64, f64)], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    intervals.iter().map(|&(a, b)| (a.max(lo), b.min(hi))).filter(|&(a, b)| a < b).collect()
}

fn merged_grid(parts: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut g: Vec<f64> = parts.into_iter().collect();
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    g
}

fn with_k(path: PotentialPath, k: &[(f64, f64)]) -> Result<PotentialPath> {
    if k.is_empty() {
        Ok(path)
    } else {
        path.with_compact_set(k)
    }
}

/// Left part of one path joined to the right part of another at `t_cut`.
#[derive(Clone, Debug)]
pub struct GluedProblem {
    pub left: PotentialPath,
    pub right: PotentialPath,
    pub t_cut: f64,
    pub collar: (f64, f64),
    /// Largest sample deviation between the two paths on the collar.
    pub mismatch: f64,
}

impl GluedProblem {
    pub fn new(left: PotentialPath, right: PotentialPath, t_cut: f64, collar: (f64, f64)) -> Result<Self> {
        if left.fiber_dim() != right.fiber_dim() {
            return Err(Error::InvalidInput("fiber dimensions differ".into()));
        }
        if !(collar.0 < t_cut && t_cut < collar.1) {
            return Err(Error::InvalidInput(format!("collar {collar:?} does not contain t_cut = {t_cut}")));
        }
        let mismatch = collar_mismatch(&left, &right, collar);
        if !(mismatch <= COLLAR_TOL) {
            return Err(Error::CollarMismatch { mismatch });
        }
        Ok(Self { left, right, t_cut, collar, mismatch })
    }

    /// `S(t) = left(t)` for `t <= t_cut`, `right(t)` beyond.
    pub fn path(&self) -> Result<PotentialPath> {
        let t = self.t_cut;
        let grid = merged_grid(
            self.left.grid().iter().copied().filter(|&x| x < t).chain([t]).chain(self.right.grid().iter().copied().filter(|&x| x > t)),
        );
        let (l, r) = (self.left.clone(), self.right.clone());
        let path = PotentialPath::new(self.left.fiber_dim(), grid, Arc::new(move |x| if x <= t { l.raw(x) } else { r.raw(x) }))?;
        let mut k = clip(self.left.compact_set(), f64::NEG_INFINITY, t);
        k.extend(clip(self.right.compact_set(), t, f64::INFINITY));
        let (c0, c1) = self.collar;
        let touches = |p: &PotentialPath| p.compact_set().iter().any(|&(a, b)| a < c1 && b > c0);
        if touches(&self.left) || touches(&self.right) {
            k.push(self.collar);
        }
        with_k(path, &k)
    }
}

fn collar_mismatch(a: &PotentialPath, b: &PotentialPath, collar: (f64, f64)) -> f64 {
    let inside = |x: &f64| collar.0 <= *x && *x <= collar.1;
    let pts = linspace(collar.0, collar.1, 17)
        .into_iter()
        .chain(a.grid().iter().copied().filter(inside))
        .chain(b.grid().iter().copied().filter(inside));
    pts.map(|t| linalg::max_abs_diff(a.raw(t).as_ref(), b.raw(t).as_ref())).fold(0.0, f64::max)
}

fn check_ends_invertible(path: &PotentialPath, tol: &Tolerances) -> Result<()> {
    for t in [path.start(), path.end()] {
        let m = path.sample(t)?.min_abs_eigenvalue()?;
        if m <= tol.proj_gap_tol {
            return Err(Error::NotInvertible { min_abs_eig: m, tol: tol.proj_gap_tol });
        }
    }
    Ok(())
}

/// `M3 = left(M1) | right(M2)` and `M4 = left(M2) | right(M1)`.
pub fn cut_paste(m1: &PotentialPath, m2: &PotentialPath, t_cut: f64, collar: (f64, f64)) -> Result<(PotentialPath, PotentialPath)> {
    let tol = Tolerances::default();
    check_ends_invertible(m1, &tol)?;
    check_ends_invertible(m2, &tol)?;
    let m3 = GluedProblem::new(m1.clone(), m2.clone(), t_cut, collar)?.path()?;
    let m4 = GluedProblem::new(m2.clone(), m1.clone(), t_cut, collar)?.path()?;
    Ok((m3, m4))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutPasteReport {
    /// Indices of `M1, M2, M3, M4`.
    pub indices: [i64; 4],
    /// Spectral flows of the four paths over their grids.
    pub flows: [i64; 4],
    pub lambda: f64,
    pub grid: GridSpec,
    /// `ind1 + ind2 = ind3 + ind4`.
    pub holds: bool,
    /// Every index equals its spectral flow and each spectral flow computation agreed with itself.
    pub consistent: bool,
}

/// Checks `ind(M1) + ind(M2) = ind(M3) + ind(M4)`.
///
/// With `lambda = None` the coupling is the largest of the four `lambda0`s;
/// a given coupling below it is rejected. With `grid = None` the grid is
/// [`GridSpec::auto_coupled`] for `M1` with spacing `h`.
pub fn verify_additivity(
    m1: &PotentialPath,
    m2: &PotentialPath,
    t_cut: f64,
    collar: (f64, f64),
    lambda: Option<f64>,
    grid: Option<GridSpec>,
    h: f64,
    opts: &IndexOptions,
) -> Result<CutPasteReport> {
    let (m3, m4) = cut_paste(m1, m2, t_cut, collar)?;
    let paths = [m1, m2, &m3, &m4];
    let probe = match grid {
        Some(g) => g,
        None => GridSpec::auto(m1, h)?,
    };
    let mut lambda0 = 0.0f64;
    for p in paths {
        lambda0 = lambda0.max(fredholm_constants(p, &probe)?.lambda0);
    }
    let lambda = match lambda {
        Some(l) if l < lambda0 => {
            return Err(Error::HypothesisUnmet(format!("lambda = {l} is below the largest lambda0 = {lambda0}")));
        }
        Some(l) => l,
        None => lambda0,
    };
    let grid = match grid {
        Some(g) => g,
        None => GridSpec::auto_coupled(m1, lambda, h)?.max_with(&GridSpec::auto_coupled(m2, lambda, h)?),
    };
    let mut indices = [0i64; 4];
    let mut flows = [0i64; 4];
    let mut consistent = true;
    for (i, p) in paths.iter().enumerate() {
        indices[i] = solve_index(p, grid, lambda, opts)?.index;
        let id = endpoint_identity(p, &opts.tol)?;
        flows[i] = id.crossings;
        consistent &= id.holds && id.crossings == indices[i];
    }
    let holds = indices[0] + indices[1] == indices[2] + indices[3];
    Ok(CutPasteReport { indices, flows, lambda, grid, holds, consistent })
}

/// Outward distance coordinate: negative inside `K`, positive outside,
/// together with the nearest boundary point.
fn outward_coordinate(k: &[(f64, f64)], t: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for &(a, b) in k {
        for y in [a, b] {
            let d = (t - y).abs();
            if d < best.0.abs() {
                best = (d, y);
            }
        }
    }
    let inside = k.iter().any(|&(a, b)| a <= t && t <= b);
    (if inside { -best.0 } else { best.0 }, best.1)
}

/// `chi A + (1 - chi) B` entrywise.
fn interpolate(a: &CMat, chi: f64, b: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * chi + b[(i, j)] * (1.0 - chi))
}

/// Checks that the interpolants on a ramp stay invertible with the inertia
/// of `anchor`.
fn check_ramp(samples: impl Iterator<Item = (f64, CMat)>, anchor: &HermitianOperator, tol: &Tolerances) -> Result<()> {
    let n_plus = anchor.eigh()?.count_positive();
    for (t, m) in samples {
        let eig = HermitianOperator::new(m)?.eigh()?;
        let min_abs = eig.min_abs();
        if min_abs <= tol.proj_gap_tol || eig.count_positive() != n_plus {
            return Err(Error::RampCrossing { t, min_abs_eig: min_abs });
        }
    }
    Ok(())
}

/// `S'(t) = chi(t) S(t) + (1 - chi(t)) S(y)` with `y` the nearer endpoint of
/// `U = [chi.lower, chi.upper]`; `S'` is constant beyond the ramps.
pub fn cylindrical_end(path: &PotentialPath, chi: &SurgeryProfile) -> Result<PotentialPath> {
    let (u0, u1, w) = (chi.lower, chi.upper, chi.width);
    if !(u0.is_finite() && u1.is_finite()) {
        return Err(Error::InvalidInput("cylindrical end needs a bounded interval U".into()));
    }
    if let Some((a, b)) = path.compact_hull() {
        if a < u0 || b > u1 {
            return Err(Error::InvalidInput(format!("U = [{u0}, {u1}] does not contain K = [{a}, {b}]")));
        }
    }
    let tol = Tolerances::default();
    let (left, right) = (path.raw(u0), path.raw(u1));
    for (y, anchor, sign) in [(u0, &left, -1.0), (u1, &right, 1.0)] {
        let anchor_h = HermitianOperator::new(anchor.clone())?;
        let samples = linspace(0.0, w, RAMP_SAMPLES).into_iter().map(|d| {
            let t = y + sign * d;
            (t, interpolate(&path.raw(t), chi.value(t), anchor))
        });
        check_ramp(samples, &anchor_h, &tol)?;
    }
    let p = path.clone();
    let profile = *chi;
    let grid = merged_grid(
        path.grid().iter().copied().chain(linspace(u0 - w, u0, 9)).chain(linspace(u1, u1 + w, 9)).chain([u0 - 2.0 * w, u1 + 2.0 * w]),
    );
    let out = PotentialPath::new(
        path.fiber_dim(),
        grid,
        Arc::new(move |t| {
            if (u0..=u1).contains(&t) {
                return p.raw(t);
            }
            let anchor = if t < u0 { &left } else { &right };
            let c = profile.value(t);
            if c == 0.0 {
                anchor.clone()
            } else {
                interpolate(&p.raw(t), c, anchor)
            }
        }),
    )?;
    with_k(out, path.compact_set())
}

/// Replaces the potential by `target` inside `K`, away from its boundary.
///
/// With `eps = -rho.upper` and `r` the outward distance to the nearest
/// boundary point `y` of `K`:
///
/// * for `r < 0` (inside `K`), `S'(t) = rho(r) T + (1 - rho(r)) S(y)`;
/// * for `r >= 0`, `S'(t) = chi(r) S(y) + (1 - chi(r)) S(t)` with `chi = 1`
///   for `r <= 2 eps` and `chi = 0` for `r >= 3 eps`.
///
/// `rho` must vanish on `[0, inf)`. Intervals of `K` must be longer than
/// `4 eps` and gaps between them longer than `6 eps`.
pub fn collar_flatten(path: &PotentialPath, target: &HermitianOperator, rho: &SurgeryProfile) -> Result<PotentialPath> {
    if target.dim() != path.fiber_dim() {
        return Err(Error::InvalidInput("target dimension differs from the fiber dimension".into()));
    }
    let eps = -rho.upper;
    if rho.lower != f64::NEG_INFINITY || !(eps > 0.0) || rho.upper + rho.width > 0.0 {
        return Err(Error::InvalidInput(format!("collar profile must be 1 below -eps < 0 and vanish on [0, inf): {rho:?}")));
    }
    let k = path.compact_set().to_vec();
    if k.is_empty() {
        return Ok(path.clone());
    }
    if k.iter().any(|&(a, b)| b - a <= 4.0 * eps) || k.windows(2).any(|w| w[1].0 - w[0].1 <= 6.0 * eps) {
        return Err(Error::InvalidInput(format!("collar width {eps} too large for K = {k:?}")));
    }
    let tol = Tolerances::default();
    let chi = SurgeryProfile::new(f64::NEG_INFINITY, 2.0 * eps, eps)?;
    for &y in k.iter().flat_map(|(a, b)| [a, b]) {
        let anchor = path.raw(y);
        let anchor_h = HermitianOperator::new(anchor.clone())?;
        let outward = if k.iter().any(|&(a, _)| a == y) { -1.0 } else { 1.0 };
        let samples = linspace(2.0 * eps, 3.0 * eps, RAMP_SAMPLES).into_iter().map(|r| {
            let t = y + outward * r;
            (t, interpolate(&anchor, chi.value(r), &path.raw(t)))
        });
        check_ramp(samples, &anchor_h, &tol)?;
    }
    let p = path.clone();
    let t_mat = target.entries().to_owned();
    let profile = *rho;
    let kk = k.clone();
    let boundary_pts = k.iter().flat_map(|&(a, b)| linspace(a - 3.0 * eps, a + eps, 9).into_iter().chain(linspace(b - eps, b + 3.0 * eps, 9)));
    let grid = merged_grid(path.grid().iter().copied().chain(boundary_pts));
    let out = PotentialPath::new(
        path.fiber_dim(),
        grid,
        Arc::new(move |t| {
            let (r, y) = outward_coordinate(&kk, t);
            if r < 0.0 {
                let v = profile.value(r);
                if v == 1.0 {
                    t_mat.clone()
                } else {
                    interpolate(&t_mat, v, &p.raw(y))
                }
            } else {
                let c = chi.value(r);
                if c == 1.0 {
                    p.raw(y)
                } else if c == 0.0 {
                    p.raw(t)
                } else {
                    interpolate(&p.raw(y), c, &p.raw(t))
                }
            }
        }),
    )?;
    with_k(out, &k)
}

/// Index and endpoint positive counts before and after a surgery.
#[derive(Clone, Debug, PartialEq)]
pub struct SurgeryReport {
    pub before: i64,
    pub after: i64,
    /// `(n_+(S(-L)), n_+(S(L)))`.
    pub counts_before: (usize, usize),
    pub counts_after: (usize, usize),
    pub preserved: bool,
}

fn endpoint_counts(path: &PotentialPath, grid: &GridSpec) -> Result<(usize, usize)> {
    let l = grid.half_length;
    Ok((path.sample(-l)?.eigh()?.count_positive(), path.sample(l)?.eigh()?.count_positive()))
}

pub fn surgery_invariance(
    original: &PotentialPath,
    modified: &PotentialPath,
    grid: GridSpec,
    lambda: f64,
    opts: &IndexOptions,
) -> Result<SurgeryReport> {
    let before = solve_index(original, grid, lambda, opts)?.index;
    let after = solve_index(modified, grid, lambda, opts)?.index;
    let counts_before = endpoint_counts(original, &grid)?;
    let counts_after = endpoint_counts(modified, &grid)?;
    Ok(SurgeryReport { before, after, counts_before, counts_after, preserved: before == after && counts_before == counts_after })
}

/// Outcome of reducing a potential to half-cylinders at the boundary of `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderReduction {
    pub original: i64,
    /// Index after the cylindrical end and collar flattening.
    pub flattened: i64,
    /// Indices of the pieces cut out at the midpoints of the intervals of `K`.
    pub pieces: Vec<i64>,
    /// For each piece, the signed sum of `rel-ind(P_+(S(y)), P_+(T))` over
    /// the boundary points `y` it contains: `-1` at left and `+1` at right
    /// endpoints.
    pub piece_pairings: Vec<i64>,
    pub holds: bool,
}

/// Cylindrical end on the hull of `K`, collar flattening towards `target`,
/// then cuts against the constant path `target` at the midpoint of every
/// interval of `K`.
pub fn cylinder_reduction(
    path: &PotentialPath,
    target: &HermitianOperator,
    eps: f64,
    lambda: f64,
    grid: GridSpec,
    opts: &IndexOptions,
) -> Result<CylinderReduction> {
    let k = path.compact_set().to_vec();
    let (a, b) = path.compact_hull().ok_or_else(|| Error::InvalidInput("cylinder reduction needs a nonempty K".into()))?;
    let tol = &opts.tol;
    let pt = positive_projection(target, tol.proj_gap_tol)?;
    let original = solve_index(path, grid, lambda, opts)?.index;
    let ended = cylindrical_end(path, &SurgeryProfile::new(a, b, eps)?)?;
    let flat = collar_flatten(&ended, target, &SurgeryProfile::collar(eps)?)?;
    let flattened = solve_index(&flat, grid, lambda, opts)?.index;

    let constant = PotentialPath::constant(target, flat.grid().to_vec())?;
    let mut rest = flat;
    let mut pieces = Vec::new();
    let mut piece_pairings = Vec::new();
    let mut pending = 0i64;
    for &(x0, x1) in &k {
        let rel = |y: f64| -> Result<i64> { rel_index_of(&positive_projection(&path.sample(y)?, tol.proj_gap_tol)?, &pt, tol) };
        let mid = 0.5 * (x0 + x1);
        let (piece, next) = cut_paste(&rest, &constant, mid, (mid - eps, mid + eps))?;
        pieces.push(solve_index(&piece, grid, lambda, opts)?.index);
        piece_pairings.push(pending - rel(x0)?);
        pending = rel(x1)?;
        rest = next;
    }
    pieces.push(solve_index(&rest, grid, lambda, opts)?.index);
    piece_pairings.push(pending);
    let holds = original == flattened && pieces.iter().sum::<i64>() == original && pieces == piece_pairings;
    Ok(CylinderReduction { original, flattened, pieces, piece_pairings, holds })
}
