//! Index of a potential on the line as a pairing over the boundary of `K`.
//!
//! For `K` a finite union of closed intervals, its boundary `N` is a finite
//! set of points with signs `gamma = -1` at left endpoints and `+1` at right
//! endpoints. The index of `-i d/dt - i lambda S` equals
//! `sum_y gamma(y) rel-ind(P_+(S(y)), P_+(T))` for any invertible `T`.
//! Fibered families over a finite set `Y` give one integer per fiber.

use crate::dirac1d::{fredholm_constants, solve_index, GridSpec, IndexOptions};
use crate::error::{Error, Result};
use crate::opcore::{linalg, positive_projection, HermitianOperator, Tolerances, TruncationTower};
use crate::relindex::rel_index_of;
use crate::scenarios::smoothstep;
use crate::specflow::{endpoint_identity, linspace, sf_crossings, sf_partition, CrossingOptions, PartitionOptions, PotentialPath};

/// Boundary points of `K` with their orientation signs.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypersurface {
    pub points: Vec<f64>,
    pub gamma: Vec<i64>,
}

impl Hypersurface {
    /// Boundary of a union of disjoint closed intervals, sorted.
    pub fn of_intervals(intervals: &[(f64, f64)]) -> Self {
        let mut iv = intervals.to_vec();
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let points = iv.iter().flat_map(|&(a, b)| [a, b]).collect();
        let gamma = iv.iter().flat_map(|_| [-1, 1]).collect();
        Self { points, gamma }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_invertible(s: &HermitianOperator, tol: &Tolerances) -> Result<()> {
    let m = s.min_abs_eigenvalue()?;
    if m <= tol.proj_gap_tol {
        return Err(Error::NotInvertible { min_abs_eig: m, tol: tol.proj_gap_tol });
    }
    Ok(())
}

/// The boundary of the path's compact set; `S` must be invertible there.
pub fn hypersurface_of(path: &PotentialPath) -> Result<Hypersurface> {
    let n = Hypersurface::of_intervals(path.compact_set());
    let tol = Tolerances::default();
    for &y in &n.points {
        check_invertible(&path.sample(y)?, &tol)?;
    }
    Ok(n)
}

/// Per-point terms `gamma(y) rel-ind(P_+(S(y)), P_+(T))` and their sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    pub terms: Vec<i64>,
    pub total: i64,
}

pub fn rhs_pairing(path: &PotentialPath, n: &Hypersurface, target: &HermitianOperator, tol: &Tolerances) -> Result<Pairing> {
    if target.dim() != path.fiber_dim() {
        return Err(Error::InvalidInput("target dimension differs from the fiber dimension".into()));
    }
    check_invertible(target, tol)?;
    let pt = positive_projection(target, tol.proj_gap_tol)?;
    let terms = n
        .points
        .iter()
        .zip(&n.gamma)
        .map(|(&y, &g)| {
            let s = path.sample(y)?;
            check_invertible(&s, tol)?;
            Ok(g * rel_index_of(&positive_projection(&s, tol.proj_gap_tol)?, &pt, tol)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pairing { total: terms.iter().sum(), terms })
}

/// `sum_y gamma(y) rank P_+(S(y))`, asserted equal to the pairing with `T = -1`.
///
/// `unital` must be set: the identification of `rel-ind(P, 0)` with the
/// class of `Ran P` needs finitely generated fibers over a unital algebra,
/// which holds for every fiber here.
pub fn ran_projection_pairing(path: &PotentialPath, n: &Hypersurface, unital: bool) -> Result<i64> {
    if !unital {
        return Err(Error::HypothesisUnmet("range pairing requires the unital, finitely generated case".into()));
    }
    let tol = Tolerances::default();
    let mut total = 0i64;
    for (&y, &g) in n.points.iter().zip(&n.gamma) {
        let s = path.sample(y)?;
        check_invertible(&s, &tol)?;
        total += g * positive_projection(&s, tol.proj_gap_tol)?.rank() as i64;
    }
    let minus_one = HermitianOperator::scalar(path.fiber_dim(), -1.0);
    let via_rel = rhs_pairing(path, n, &minus_one, &tol)?.total;
    if via_rel != total {
        return Err(Error::TheoremViolation(format!("range pairing {total} differs from the pairing against -1: {via_rel}")));
    }
    Ok(total)
}

/// Paths over a finite fiber set `Y` on a common grid.
#[derive(Clone, Debug)]
pub struct FiberedFamily {
    fibers: Vec<PotentialPath>,
}

impl FiberedFamily {
    pub fn new(fibers: Vec<PotentialPath>) -> Result<Self> {
        let first = fibers.first().ok_or_else(|| Error::InvalidInput("fibered family needs at least one fiber".into()))?;
        if fibers.iter().any(|f| f.grid() != first.grid()) {
            return Err(Error::InvalidInput("fibers must share a grid".into()));
        }
        Ok(Self { fibers })
    }

    pub fn single(path: PotentialPath) -> Self {
        Self { fibers: vec![path] }
    }

    pub fn fibers(&self) -> &[PotentialPath] {
        &self.fibers
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    /// Union of the fibers' compact sets.
    pub fn compact_set(&self) -> Vec<(f64, f64)> {
        let union: Vec<(f64, f64)> = self.fibers.iter().flat_map(|f| f.compact_set().iter().copied()).collect();
        if union.is_empty() {
            return union;
        }
        let merged = self.fibers[0].clone().with_compact_set(&union).expect("valid intervals");
        merged.compact_set().to_vec()
    }

    /// Block-diagonal path over all fibers.
    pub fn total_space(&self) -> Result<PotentialPath> {
        PotentialPath::direct_sum(&self.fibers, self.fibers[0].grid().to_vec())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalliasReport {
    /// Index per fiber.
    pub lhs: Vec<i64>,
    /// Pairing per fiber with the first target.
    pub rhs: Vec<i64>,
    /// Pairing per fiber with the second target.
    pub rhs_alt: Vec<i64>,
    /// Per-point terms of the first pairing, per fiber.
    pub terms: Vec<Vec<i64>>,
    /// Spectral flow per fiber over the path grid.
    pub flows: Vec<i64>,
    /// Index of the block-diagonal total operator, when computed.
    pub total: Option<i64>,
    pub hypersurface: Hypersurface,
    pub lambda: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalliasOptions {
    pub index: IndexOptions,
    /// Coupling; raised to the largest `lambda0` over the fibers if smaller.
    pub lambda: f64,
    /// Grid spacing for the automatic grid.
    pub h: f64,
    /// Also compute the index of the block-diagonal total operator.
    pub total: bool,
}

impl Default for CalliasOptions {
    fn default() -> Self {
        Self { index: IndexOptions { refine: false, ..Default::default() }, lambda: 3.0, h: 0.25, total: true }
    }
}

/// Index equals pairing for each fiber, for two independent targets per
/// fiber. A mismatch is a `TheoremViolation`.
pub fn callias_check_fibered(
    family: &FiberedFamily,
    targets: &[HermitianOperator],
    alt_targets: &[HermitianOperator],
    opts: &CalliasOptions,
) -> Result<CalliasReport> {
    let m = family.len();
    if targets.len() != m || alt_targets.len() != m {
        return Err(Error::InvalidInput(format!("need {m} targets per list, got {} and {}", targets.len(), alt_targets.len())));
    }
    let tol = &opts.index.tol;
    let k = family.compact_set();
    let n = Hypersurface::of_intervals(&k);
    let total_path = family.total_space()?;
    let total_path = if k.is_empty() { total_path } else { total_path.with_compact_set(&k)? };
    let mut grid = GridSpec::auto(&total_path, opts.h)?;
    let mut lambda = opts.lambda;
    for f in family.fibers() {
        lambda = lambda.max(fredholm_constants(f, &grid)?.lambda0);
    }
    grid = GridSpec::auto_coupled(&total_path, lambda, opts.h)?;

    let (mut lhs, mut rhs, mut rhs_alt, mut terms, mut flows) = (vec![], vec![], vec![], vec![], vec![]);
    for ((f, t), t_alt) in family.fibers().iter().zip(targets).zip(alt_targets) {
        lhs.push(stable_index(f, &total_path, grid, lambda, opts)?);
        flows.push(endpoint_identity(f, tol)?.crossings);
        let p = rhs_pairing(f, &n, t, tol)?;
        rhs.push(p.total);
        terms.push(p.terms);
        rhs_alt.push(rhs_pairing(f, &n, t_alt, tol)?.total);
    }
    let total = if opts.total { Some(stable_index(&total_path, &total_path, grid, lambda, opts)?) } else { None };
    let pass = lhs == rhs && rhs == rhs_alt && lhs == flows && total.map_or(true, |t| t == lhs.iter().sum::<i64>());
    let report = CalliasReport { lhs, rhs, rhs_alt, terms, flows, total, hypersurface: n, lambda, pass };
    if !report.pass {
        return Err(Error::TheoremViolation(format!("index and boundary pairing disagree: {report:?}")));
    }
    Ok(report)
}

/// Retries at doubled coupling, up to `MAX_LAMBDA_DOUBLINGS` times.
pub const MAX_LAMBDA_DOUBLINGS: usize = 2;

/// Index at `lambda`, or at a doubled coupling when the rank decision is
/// ambiguous. The index does not depend on `lambda` above `lambda0`, while
/// near-null singular values of tunnelling kernel/cokernel pairs shrink
/// exponentially in it.
fn stable_index(path: &PotentialPath, grid_path: &PotentialPath, grid: GridSpec, lambda: f64, opts: &CalliasOptions) -> Result<i64> {
    let mut attempt = solve_index(path, grid, lambda, &opts.index);
    let mut l = lambda;
    for _ in 0..MAX_LAMBDA_DOUBLINGS {
        if !matches!(attempt, Err(Error::AmbiguousRank { .. })) {
            break;
        }
        l *= 2.0;
        attempt = solve_index(path, GridSpec::auto_coupled(grid_path, l, opts.h)?, l, &opts.index);
    }
    Ok(attempt?.index)
}

/// Single-fiber [`callias_check_fibered`].
pub fn callias_check(
    path: &PotentialPath,
    target: &HermitianOperator,
    alt_target: &HermitianOperator,
    opts: &CalliasOptions,
) -> Result<CalliasReport> {
    let opts = CalliasOptions { total: false, ..*opts };
    callias_check_fibered(&FiberedFamily::single(path.clone()), std::slice::from_ref(target), std::slice::from_ref(alt_target), &opts)
}

/// Spectral flow over an interval computed four ways.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowIdentity {
    pub crossings: i64,
    pub partition: i64,
    pub relative_index: i64,
    /// Boundary pairing with `N = {start, end}`, `gamma = (-1, +1)`.
    pub pairing: i64,
    pub holds: bool,
}

/// `sf = rel-ind(P_+(S(end)), P_+(S(start)))` = boundary pairing against
/// `target` (default `-1`).
pub fn interval_flow_identity(path: &PotentialPath, target: Option<&HermitianOperator>, tol: &Tolerances) -> Result<FlowIdentity> {
    let crossings = sf_crossings(path, &CrossingOptions { tol: *tol, ..Default::default() })?.flow;
    let partition = sf_partition(path, &PartitionOptions { tol: *tol, ..Default::default() })?.flow;
    let relative_index = crate::specflow::endpoint_relative_index(path, tol)?;
    let n = Hypersurface::of_intervals(&[(path.start(), path.end())]);
    let minus_one = HermitianOperator::scalar(path.fiber_dim(), -1.0);
    let pairing = rhs_pairing(path, &n, target.unwrap_or(&minus_one), tol)?.total;
    let holds = crossings == partition && partition == relative_index && relative_index == pairing;
    Ok(FlowIdentity { crossings, partition, relative_index, pairing, holds })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TowerCalliasReport {
    pub dims: Vec<usize>,
    pub indices: Vec<i64>,
    /// `|(P_+(S(y)) - P_+(T)) Pi_tail|` at the right boundary point, per dim;
    /// zero where the tail is empty.
    pub tail_norms: Vec<f64>,
    pub stabilized: bool,
    /// Tail norms grow by at most a factor 2 between consecutive dims with a
    /// nonempty tail.
    pub tails_decay: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TowerCalliasOptions {
    /// Coordinates at or beyond this index form the tail.
    pub rank_cutoff: usize,
    pub lambda: f64,
    pub h: f64,
    pub tail_bound: f64,
}

impl Default for TowerCalliasOptions {
    fn default() -> Self {
        Self { rank_cutoff: 6, lambda: 1.0, h: 0.75, tail_bound: 1e-6 }
    }
}

/// `S_n(t) = T_n + phi(t) R_n` with `phi` a smoothstep on `K = [0, 1]` and
/// target `T_n`, checked at every tower level.
///
/// Requires `|R_n (T_n +- i)^{-1} Pi_tail| <= tail_bound`; the top two
/// indices must agree, else `TowerTooShallow`.
pub fn tower_callias(tower: &TruncationTower, opts: &TowerCalliasOptions) -> Result<TowerCalliasReport> {
    let tol = Tolerances::default();
    let copts = CalliasOptions { lambda: opts.lambda, h: opts.h, total: false, ..Default::default() };
    let mut indices = Vec::new();
    let mut tail_norms = Vec::new();
    for inst in tower.instances()? {
        let n = inst.dim;
        let tail = crate::opcore::tower::tail_projection(n, opts.rank_cutoff.min(n));
        let t_eig = inst.operator.eigh()?;
        for sign in [1.0, -1.0] {
            let res = t_eig.reconstruct_complex(|v| crate::c64::new(1.0, 0.0) / crate::c64::new(v, sign));
            let norm = linalg::opnorm((inst.perturbation.entries() * &res * &tail).as_ref());
            if norm > opts.tail_bound {
                return Err(Error::HypothesisUnmet(format!("perturbation tail {norm:.3e} exceeds {:.1e} at dim {n}", opts.tail_bound)));
            }
        }
        let (t_mat, r_mat) = (inst.operator.entries().to_owned(), inst.perturbation.entries().to_owned());
        let path = PotentialPath::from_fn(n, linspace(-3.0, 4.0, 141), move |t| {
            let phi = smoothstep(t);
            faer::Mat::from_fn(n, n, |i, j| t_mat[(i, j)] + r_mat[(i, j)] * phi)
        })?
        .with_compact_set(&[(0.0, 1.0)])?;
        let report = callias_check(&path, &inst.operator, &HermitianOperator::scalar(n, -1.0), &copts)?;
        indices.push(report.lhs[0]);
        let p_end = positive_projection(&path.sample(1.0)?, tol.proj_gap_tol)?;
        let p_t = positive_projection(&inst.operator, tol.proj_gap_tol)?;
        let diff = &p_end.entries().to_owned() - &p_t.entries().to_owned();
        tail_norms.push(linalg::opnorm((&diff * &tail).as_ref()));
    }
    let dims = tower.dims().to_vec();
    let stabilized = indices.len() >= 2 && indices[indices.len() - 1] == indices[indices.len() - 2];
    if !stabilized {
        return Err(Error::TowerTooShallow { values: indices });
    }
    let nonempty: Vec<f64> = dims.iter().zip(&tail_norms).filter(|(&d, _)| d > opts.rank_cutoff).map(|(_, &v)| v).collect();
    let tails_decay = nonempty.windows(2).all(|w| w[1] <= 2.0 * w[0] + 1e-12);
    Ok(TowerCalliasReport { dims, indices, tail_norms, stabilized, tails_decay })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::Template;
    use crate::scenarios::{random_callias_family, scalar_path};
    use std::sync::Arc;

    fn scalar(v: f64) -> HermitianOperator {
        HermitianOperator::scalar(1, v)
    }

    #[test]
    fn hypersurface_signs() {
        let n = Hypersurface::of_intervals(&[(2.0, 3.0), (0.0, 1.0)]);
        assert_eq!(n.points, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(n.gamma, vec![-1, 1, -1, 1]);
        let p = scalar_path(linspace(-2.0, 2.0, 41), |_| 1.0).unwrap();
        assert!(hypersurface_of(&p).unwrap().is_empty());
        let q = scalar_path(linspace(-2.0, 2.0, 41), |t| t).unwrap().with_compact_set(&[(0.0, 1.0)]).unwrap();
        assert!(matches!(hypersurface_of(&q), Err(Error::NotInvertible { .. })));
    }

    #[test]
    fn pairing_examples() {
        let tol = Tolerances::default();
        let p = scalar_path(linspace(-1.0, 2.0, 31), |t| 2.0 * t.clamp(0.0, 1.0) - 1.0).unwrap().with_compact_set(&[(0.0, 1.0)]).unwrap();
        let n = hypersurface_of(&p).unwrap();
        assert_eq!(rhs_pairing(&p, &n, &scalar(-1.0), &tol).unwrap(), Pairing { terms: vec![0, 1], total: 1 });
        assert_eq!(rhs_pairing(&p, &n, &scalar(1.0), &tol).unwrap(), Pairing { terms: vec![1, 0], total: 1 });
        assert_eq!(rhs_pairing(&p, &Hypersurface::of_intervals(&[]), &scalar(1.0), &tol).unwrap().total, 0);
        assert_eq!(ran_projection_pairing(&p, &n, true).unwrap(), 1);
        assert!(matches!(ran_projection_pairing(&p, &n, false), Err(Error::HypothesisUnmet(_))));
    }

    #[test]
    fn range_pairing_examples() {
        let pos = PotentialPath::constant(&HermitianOperator::from_real_diagonal(&[1.0, 2.0, 3.0]), linspace(-1.0, 2.0, 7))
            .unwrap()
            .with_compact_set(&[(0.0, 1.0)])
            .unwrap();
        assert_eq!(ran_projection_pairing(&pos, &hypersurface_of(&pos).unwrap(), true).unwrap(), 0);
        // ranks (0, 1, 1, 2) at the four boundary points of two intervals.
        let f = |t: f64| -> Vec<f64> {
            if t < 0.5 {
                vec![-1.0, -1.0]
            } else if t < 2.5 {
                vec![1.0, -1.0]
            } else {
                vec![1.0, 1.0]
            }
        };
        let two = PotentialPath::diagonal(linspace(-1.0, 4.0, 51), vec![Arc::new(move |t| f(t)[0]), Arc::new(move |t| f(t)[1])])
            .unwrap()
            .with_compact_set(&[(0.0, 1.0), (2.0, 3.0)])
            .unwrap();
        assert_eq!(ran_projection_pairing(&two, &hypersurface_of(&two).unwrap(), true).unwrap(), 2);
    }

    #[test]
    fn tanh_and_split_pair() {
        let opts = CalliasOptions { h: 0.1, lambda: 2.0, ..Default::default() };
        let p = scalar_path(linspace(-12.0, 12.0, 241), f64::tanh).unwrap().with_compact_set(&[(-1.0, 1.0)]).unwrap();
        let r = callias_check(&p, &scalar(-1.0), &scalar(0.5), &opts).unwrap();
        assert_eq!((r.lhs[0], r.rhs[0], r.rhs_alt[0]), (1, 1, 1));
        let two = PotentialPath::diagonal(linspace(-12.0, 12.0, 241), vec![Arc::new(f64::tanh), Arc::new(|t: f64| -t.tanh())])
            .unwrap()
            .with_compact_set(&[(-1.0, 1.0)])
            .unwrap();
        let r2 = callias_check(&two, &HermitianOperator::scalar(2, -1.0), &HermitianOperator::scalar(2, 1.0), &opts).unwrap();
        assert_eq!(r2.lhs, vec![0]);
        assert_eq!(r2.terms, vec![vec![-1, 1]]);
    }

    #[test]
    fn fibered_family_reports_per_fiber() {
        let grid = linspace(-12.0, 12.0, 241);
        let fibers = vec![
            scalar_path(grid.clone(), f64::tanh).unwrap().with_compact_set(&[(-1.0, 1.0)]).unwrap(),
            scalar_path(grid.clone(), |_| 1.0).unwrap(),
            PotentialPath::diagonal(grid.clone(), vec![Arc::new(|t: f64| -t.tanh()), Arc::new(|t: f64| -(t - 0.5).tanh())])
                .unwrap()
                .with_compact_set(&[(-1.0, 1.5)])
                .unwrap(),
        ];
        let fam = FiberedFamily::new(fibers).unwrap();
        let targets: Vec<HermitianOperator> = [1, 1, 2].iter().map(|&k| HermitianOperator::scalar(k, -1.0)).collect();
        let alts: Vec<HermitianOperator> = [1, 1, 2].iter().map(|&k| HermitianOperator::scalar(k, 1.0)).collect();
        let r = callias_check_fibered(&fam, &targets, &alts, &CalliasOptions { h: 0.1, lambda: 2.0, ..Default::default() }).unwrap();
        assert_eq!(r.lhs, vec![1, 0, -2]);
        assert_eq!(r.total, Some(-1));
    }

    #[test]
    fn seeded_families_pass() {
        for seed in 0..3u64 {
            let case = random_callias_family(seed, 3, 3, 2).unwrap();
            let r = callias_check_fibered(&case.family, &case.targets, &case.alt_targets, &CalliasOptions::default()).unwrap();
            assert!(r.pass);
        }
    }

    #[test]
    fn interval_identity_examples() {
        let tol = Tolerances::default();
        let c = PotentialPath::constant(&HermitianOperator::from_real_diagonal(&[1.0, -2.0]), linspace(0.0, 1.0, 9)).unwrap();
        let r = interval_flow_identity(&c, None, &tol).unwrap();
        assert!(r.holds && r.crossings == 0);
        let l = scalar_path(linspace(0.0, 1.0, 17), |t| 2.0 * t - 1.0).unwrap();
        let r = interval_flow_identity(&l, Some(&scalar(3.0)), &tol).unwrap();
        assert!(r.holds && r.pairing == 1);
        let s = crate::scenarios::random_sf_path(7, 8, 64).unwrap();
        assert!(interval_flow_identity(&s, None, &tol).unwrap().holds);
    }

    fn tower(perturbation: Template) -> TruncationTower {
        TruncationTower::from_templates(vec![4, 8, 12, 16], Template::Alternating { scale: 1.0 }, perturbation).unwrap()
    }

    #[test]
    fn tower_stabilizes() {
        let r = tower_callias(&tower(Template::DecayingRank { coeffs: vec![-2.5, -2.5], rate: 3.0 }), &Default::default()).unwrap();
        assert_eq!(r.indices, vec![-1; 4]);
        assert!(r.tails_decay, "{r:?}");
        let z = tower_callias(&tower(Template::Zero), &Default::default()).unwrap();
        assert_eq!(z.indices, vec![0; 4]);
    }

    #[test]
    fn tower_tail_violation_rejected() {
        let r = tower_callias(&tower(Template::Banded { diag: 0.0, off: 0.3 }), &Default::default());
        assert!(matches!(r, Err(Error::HypothesisUnmet(_))), "{r:?}");
    }
}
