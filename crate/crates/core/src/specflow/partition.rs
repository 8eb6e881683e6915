use super::path::PotentialPath;
use crate::error::{Error, Result};
use crate::opcore::{spectral_projection_above, HermitianOperator, Tolerances};
use crate::relindex::rel_index_of;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionOptions {
    pub tol: Tolerances,
    /// Samples per subinterval, endpoints included.
    pub samples: usize,
    /// Maximum number of bisections of an initial grid interval.
    pub max_depth: usize,
    /// Width given to the half-line gaps below and above the spectrum.
    pub half_line_width: f64,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), samples: 5, max_depth: 12, half_line_width: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionFlow {
    pub flow: i64,
    /// Partition points `t_0 < ... < t_m`.
    pub partition: Vec<f64>,
    /// Level `a_i` kept out of the spectrum on `[t_i, t_{i+1}]`.
    pub levels: Vec<f64>,
    /// Junction contributions `ind(S(t_i), -a_{i-1}, -a_i)`.
    pub terms: Vec<i64>,
    /// Flow recomputed on the bisected partition with fresh levels.
    pub refined_flow: i64,
}

/// Spectral flow from a partition with a trivialising level on each subinterval.
///
/// On `[t_i, t_{i+1}]` the constant family `B = -a_i` keeps `S(t) + B`
/// invertible. The flow is the sum of junction indices
/// `ind(S(t_i), B^{i-1}, B^i) = rel-ind(P_+(S(t_i) - a_i), P_+(S(t_i) - a_{i-1}))`,
/// with `B = 0` at both ends. The computation is repeated on the bisected
/// partition and the two results must agree.
pub fn sf_partition(path: &PotentialPath, opts: &PartitionOptions) -> Result<PartitionFlow> {
    let (partition, levels) = build_partition(path, path.grid(), opts)?;
    let (flow, terms) = flow_from(path, &partition, &levels, &opts.tol)?;
    let doubled: Vec<f64> = partition
        .windows(2)
        .flat_map(|w| [w[0], 0.5 * (w[0] + w[1])])
        .chain(std::iter::once(*partition.last().unwrap()))
        .collect();
    let (p2, l2) = build_partition(path, &doubled, opts)?;
    let (refined_flow, _) = flow_from(path, &p2, &l2, &opts.tol)?;
    if refined_flow != flow {
        return Err(Error::PartitionDependence { coarse: flow, refined: refined_flow });
    }
    Ok(PartitionFlow { flow, partition, levels, terms, refined_flow })
}

fn build_partition(path: &PotentialPath, points: &[f64], opts: &PartitionOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut partition = vec![points[0]];
    let mut levels = Vec::new();
    for w in points.windows(2) {
        subdivide(path, w[0], w[1], 0, opts, &mut partition, &mut levels)?;
    }
    Ok((partition, levels))
}

fn subdivide(
    path: &PotentialPath,
    a: f64,
    b: f64,
    depth: usize,
    opts: &PartitionOptions,
    partition: &mut Vec<f64>,
    levels: &mut Vec<f64>,
) -> Result<()> {
    if let Some(level) = find_level(path, a, b, opts)? {
        partition.push(b);
        levels.push(level);
        return Ok(());
    }
    if depth >= opts.max_depth {
        return Err(Error::PartitionFailure { a, b });
    }
    let m = 0.5 * (a + b);
    subdivide(path, a, m, depth + 1, opts, partition, levels)?;
    subdivide(path, m, b, depth + 1, opts, partition, levels)
}

/// Chooses a level in a spectral gap that is common to all samples on `[a, b]`.
///
/// Candidate gaps are the bounded gaps of the union of sampled spectra plus
/// two half-lines of width `half_line_width`. A gap is admissible when its
/// half-width exceeds both `proj_gap_tol` and half the largest norm change
/// between consecutive samples (so eigenvalues cannot reach the level
/// between samples if the path is Lipschitz at that scale). Among admissible
/// gaps the one maximizing `width / (1 + |midpoint|)` is chosen.
fn find_level(path: &PotentialPath, a: f64, b: f64, opts: &PartitionOptions) -> Result<Option<f64>> {
    let n = opts.samples.max(2);
    let samples: Vec<HermitianOperator> =
        (0..n).map(|i| path.sample(a + (b - a) * i as f64 / (n - 1) as f64)).collect::<Result<_>>()?;
    let mut drift = 0.0f64;
    for w in samples.windows(2) {
        drift = drift.max(w[1].try_sub(&w[0])?.spectral_norm()?);
    }
    let need = opts.tol.proj_gap_tol.max(0.5 * drift);
    let mut union: Vec<f64> = Vec::new();
    for s in &samples {
        union.extend(s.eigenvalues()?);
    }
    union.sort_by(f64::total_cmp);
    let lo = union[0];
    let hi = *union.last().unwrap();
    let mut gaps: Vec<(f64, f64)> = vec![(lo - opts.half_line_width, lo), (hi, hi + opts.half_line_width)];
    gaps.extend(union.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])));
    let best = gaps
        .into_iter()
        .filter(|&(x, y)| 0.5 * (y - x) >= need)
        .map(|(x, y)| (0.5 * (x + y), (y - x) / (1.0 + (0.5 * (x + y)).abs())))
        .max_by(|p, q| p.1.total_cmp(&q.1));
    Ok(best.map(|(mid, _)| mid))
}

fn flow_from(path: &PotentialPath, partition: &[f64], levels: &[f64], tol: &Tolerances) -> Result<(i64, Vec<i64>)> {
    let m = levels.len();
    let mut terms = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let before = if i == 0 { 0.0 } else { levels[i - 1] };
        let after = if i == m { 0.0 } else { levels[i] };
        let s = path.sample(partition[i])?;
        terms.push(ind_levels(&s, before, after, tol)?);
    }
    Ok((terms.iter().sum(), terms))
}

/// `ind(S, -a0, -a1) = rel-ind(P_+(S - a1), P_+(S - a0))`.
pub(crate) fn ind_levels(s: &HermitianOperator, a0: f64, a1: f64, tol: &Tolerances) -> Result<i64> {
    let p1 = spectral_projection_above(s, a1, tol.proj_gap_tol)?;
    let p0 = spectral_projection_above(s, a0, tol.proj_gap_tol)?;
    rel_index_of(&p1, &p0, tol)
}
