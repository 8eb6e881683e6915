use super::path::PotentialPath;
use crate::error::{Error, Result};
use crate::opcore::{Eigh, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossingOptions {
    pub tol: Tolerances,
    /// Bisection depth when locating a single crossing.
    pub max_depth: usize,
    /// Bisection depth when resolving ambiguous branch matching.
    pub max_match_depth: usize,
    /// Overlaps closer than this are considered ambiguous.
    pub ambiguity: f64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), max_depth: 40, max_match_depth: 20, ambiguity: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub branch: usize,
    /// +1 for a negative-to-positive crossing, -1 for the reverse.
    pub direction: i64,
    /// False when bisection ran out of depth before the branch reached
    /// `crossing_tol`; `t` is then the midpoint of the final bracket.
    pub located: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingReport {
    pub flow: i64,
    pub crossings: Vec<Crossing>,
    /// Eigenvalues at each grid point, listed in tracked branch order.
    pub branches: Vec<Vec<f64>>,
    /// Number of extra samples inserted to disambiguate branch matching.
    pub refinements: usize,
}

/// Spectral flow by counting signed zero crossings of tracked eigenvalue branches.
///
/// Branches are matched between consecutive samples by eigenvector overlap.
/// A crossing is located by bisection until the branch eigenvalue is below
/// `crossing_tol` in absolute value; its direction is the sign change of the
/// bracketing values. The flow itself does not depend on the location: per
/// sample interval the signed changes sum to the change of `n_+`.
pub fn sf_crossings(path: &PotentialPath, opts: &CrossingOptions) -> Result<CrossingReport> {
    let tol = &opts.tol;
    let grid = path.grid();
    let eigs: Vec<Eigh> = grid.iter().map(|&t| path.sample(t)?.eigh()).collect::<Result<_>>()?;
    for e in [&eigs[0], eigs.last().unwrap()] {
        if e.min_abs() < tol.proj_gap_tol {
            return Err(Error::NotInvertible { min_abs_eig: e.min_abs(), tol: tol.proj_gap_tol });
        }
    }
    let k = path.fiber_dim();
    let mut tracker = Tracker { path, opts, refinements: 0 };
    let mut order: Vec<usize> = (0..k).collect();
    // Last nonzero sign seen on each branch, with the sample where it was seen.
    let mut last: Vec<(f64, usize, usize)> = (0..k).map(|b| (eigs[0].values[b].signum(), 0, b)).collect();
    let mut branches = vec![order.iter().map(|&i| eigs[0].values[i]).collect::<Vec<_>>()];
    let mut crossings = Vec::new();
    for j in 0..grid.len() - 1 {
        let map = tracker.match_interval(grid[j], &eigs[j], grid[j + 1], &eigs[j + 1], 0)?;
        order = order.iter().map(|&i| map[i]).collect();
        branches.push(order.iter().map(|&i| eigs[j + 1].values[i]).collect());
        for b in 0..k {
            let v = eigs[j + 1].values[order[b]];
            if v == 0.0 {
                continue;
            }
            let (sign, ja, ia) = last[b];
            if v.signum() != sign {
                let (t, located) = tracker.locate(grid[ja], &eigs[ja], ia, grid[j + 1], sign)?;
                crossings.push(Crossing { t, branch: b, direction: if sign < 0.0 { 1 } else { -1 }, located });
            }
            last[b] = (v.signum(), j + 1, order[b]);
        }
    }
    let flow = crossings.iter().map(|c| c.direction).sum();
    Ok(CrossingReport { flow, crossings, branches, refinements: tracker.refinements })
}

struct Tracker<'a> {
    path: &'a PotentialPath,
    opts: &'a CrossingOptions,
    refinements: usize,
}

fn overlap(a: &Eigh, i: usize, b: &Eigh, j: usize) -> f64 {
    let n = a.vectors.nrows();
    let mut s = crate::c64::new(0.0, 0.0);
    for r in 0..n {
        s += a.vectors[(r, i)].conj() * b.vectors[(r, j)];
    }
    s.norm_sqr()
}

impl Tracker<'_> {
    /// Bijection from eigenvalue indices at `ta` to indices at `tb`.
    fn match_interval(&mut self, ta: f64, ea: &Eigh, tb: f64, eb: &Eigh, depth: usize) -> Result<Vec<usize>> {
        let (map, harmful) = self.greedy(ea, eb);
        if !harmful {
            return Ok(map);
        }
        if depth >= self.opts.max_match_depth {
            return Err(Error::RefineGrid { t: ta });
        }
        let tm = 0.5 * (ta + tb);
        let em = self.path.sample(tm)?.eigh()?;
        self.refinements += 1;
        let left = self.match_interval(ta, ea, tm, &em, depth + 1)?;
        let right = self.match_interval(tm, &em, tb, eb, depth + 1)?;
        Ok(left.iter().map(|&i| right[i]).collect())
    }

    /// Greedy maximal-overlap matching. The second value reports an
    /// ambiguity between targets of different sign, the only kind that can
    /// misattribute a crossing.
    fn greedy(&self, ea: &Eigh, eb: &Eigh) -> (Vec<usize>, bool) {
        let k = ea.dim();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                pairs.push((overlap(ea, i, eb, j), i, j));
            }
        }
        let mut harmful = false;
        for i in 0..k {
            let mut row: Vec<(f64, usize)> = (0..k).map(|j| (overlap(ea, i, eb, j), j)).collect();
            row.sort_by(|x, y| y.0.total_cmp(&x.0));
            if row.len() > 1 && row[0].0 - row[1].0 < self.opts.ambiguity {
                let (s0, s1) = (eb.values[row[0].1].signum(), eb.values[row[1].1].signum());
                let sa = ea.values[i].signum();
                if s0 != s1 && (s0 != sa || s1 != sa) {
                    harmful = true;
                }
            }
        }
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut map = vec![usize::MAX; k];
        let mut taken = vec![false; k];
        for (_, i, j) in pairs {
            if map[i] == usize::MAX && !taken[j] {
                map[i] = j;
                taken[j] = true;
            }
        }
        (map, harmful)
    }

    /// Bisects `[ta, tb]` for the zero of the branch that has sign `sign` at
    /// `ta` (eigen index `ia` of `ea`).
    fn locate(&mut self, mut ta: f64, ea: &Eigh, ia: usize, mut tb: f64, sign: f64) -> Result<(f64, bool)> {
        let mut cur = ea.clone();
        let mut idx = ia;
        for _ in 0..self.opts.max_depth {
            let tm = 0.5 * (ta + tb);
            if tm <= ta || tm >= tb {
                return Ok((tm, true));
            }
            let em = self.path.sample(tm)?.eigh()?;
            let jm = (0..em.dim())
                .max_by(|&x, &y| overlap(&cur, idx, &em, x).total_cmp(&overlap(&cur, idx, &em, y)))
                .unwrap_or(0);
            let v = em.values[jm];
            if v.abs() <= self.opts.tol.crossing_tol {
                return Ok((tm, true));
            }
            if v.signum() == sign {
                ta = tm;
                cur = em;
                idx = jm;
            } else {
                tb = tm;
            }
        }
        Ok((0.5 * (ta + tb), false))
    }
}
