//! Builds the configured potential path.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use indexlab_core::scenarios::{interval_layout, random_line_path};
use indexlab_core::specflow::{linspace, PotentialPath};
use indexlab_core::{c64, CMat, Error as CoreError};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Builtin, PotentialSpec, ScenarioConfig};

/// Grid shared by the builtin potentials.
pub const BUILTIN_SPAN: f64 = 8.0;
pub const BUILTIN_SAMPLES: usize = 161;
pub const BUILTIN_K: (f64, f64) = (-1.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

impl From<CoreError> for InputError {
    fn from(e: CoreError) -> Self {
        InputError(e.to_string())
    }
}

/// The configured potential with a canonical description of where it came from.
#[derive(Clone, Debug)]
pub struct LoadedPotential {
    pub path: PotentialPath,
    /// Canonical description, hashed into every record digest.
    pub description: Value,
    /// Scalar `tanh`, whose kernel profile has a closed form.
    pub is_tanh: bool,
}

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn diag_entry(name: &str) -> Option<Scalar> {
    Some(match name.trim() {
        "tanh" => Arc::new(f64::tanh),
        "-tanh" => Arc::new(|t: f64| -t.tanh()),
        "linear" => Arc::new(|t: f64| t),
        "-linear" => Arc::new(|t: f64| -t),
        other => {
            let c: f64 = other.parse().ok().filter(|c: &f64| c.is_finite())?;
            Arc::new(move |_| c)
        }
    })
}

fn builtin_grid() -> Vec<f64> {
    linspace(-BUILTIN_SPAN, BUILTIN_SPAN, BUILTIN_SAMPLES)
}

pub fn load(cfg: &ScenarioConfig, base: Option<&Path>) -> Result<LoadedPotential, InputError> {
    let (path, description, is_tanh) = match &cfg.potential {
        PotentialSpec::Builtin(b) => {
            let (f, name): (Scalar, &str) = match b {
                Builtin::Tanh => (Arc::new(f64::tanh), "tanh"),
                Builtin::Linear => (Arc::new(|t: f64| t), "linear"),
            };
            let path = PotentialPath::diagonal(builtin_grid(), vec![f])?.with_compact_set(&[BUILTIN_K])?;
            (path, json!({ "builtin": name }), *b == Builtin::Tanh)
        }
        PotentialSpec::Diag(entries) => {
            let fs = entries
                .iter()
                .map(|e| diag_entry(e).ok_or_else(|| InputError(format!("unknown diagonal entry {e:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let path = PotentialPath::diagonal(builtin_grid(), fs)?.with_compact_set(&[BUILTIN_K])?;
            let tanh = entries.len() == 1 && entries[0].trim() == "tanh";
            (path, json!({ "diag": entries }), tanh)
        }
        PotentialSpec::Seeded(s) => {
            let seed = s.seed.unwrap_or(cfg.seed);
            let (k_set, span) = interval_layout(s.intervals);
            let path = random_line_path(seed, s.k, &k_set, span, 121, 0.5)?;
            (path, json!({ "seeded": { "seed": seed, "k": s.k, "intervals": s.intervals } }), false)
        }
        PotentialSpec::File(p) => {
            let full = match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p.clone(),
            };
            let text = std::fs::read_to_string(&full).map_err(|e| InputError(format!("cannot read {}: {e}", full.display())))?;
            let table = parse_table(&text).map_err(|e| InputError(format!("{}: {}", full.display(), e.0)))?;
            let digest = hex(&Sha256::digest(text.as_bytes()));
            let path = table.into_path()?;
            (path, json!({ "file": { "sha256": digest } }), false)
        }
    };
    let path = match &cfg.compact_set {
        Some(k) => path.with_compact_set(k)?,
        None => path,
    };
    let description = json!({ "source": description, "compact_set": path.compact_set() });
    Ok(LoadedPotential { path, description, is_tanh })
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Samples read from a tabulated potential file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub k: usize,
    pub times: Vec<f64>,
    /// Row-major `k x k` complex entries per sample.
    pub values: Vec<Vec<c64>>,
}

const HERMITIAN_TOL: f64 = 1e-10;

/// Parses `k n` on the first line, then `n` samples of `t` followed by
/// `k^2` `re,im` pairs, row-major. Whitespace and commas both separate tokens.
pub fn parse_table(text: &str) -> Result<Table, InputError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| InputError("empty potential file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || InputError(format!("line {}: expected \"k n_samples\", got {header:?}", hl + 1));
    if head.len() != 2 {
        return Err(bad_header());
    }
    let k: usize = head[0].parse().map_err(|_| bad_header())?;
    let n: usize = head[1].parse().map_err(|_| bad_header())?;
    if k == 0 || n < 2 {
        return Err(InputError(format!("line {}: need k >= 1 and at least 2 samples", hl + 1)));
    }
    let mut tokens = Vec::new();
    for (i, line) in lines {
        for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| InputError(format!("line {}: not a number: {tok:?}", i + 1)))?;
            if !v.is_finite() {
                return Err(InputError(format!("line {}: non-finite value {tok:?}", i + 1)));
            }
            tokens.push(v);
        }
    }
    let per = 1 + 2 * k * k;
    if tokens.len() != n * per {
        return Err(InputError(format!("expected {} numbers for {n} samples of a {k}x{k} potential, found {}", n * per, tokens.len())));
    }
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for (s, chunk) in tokens.chunks(per).enumerate() {
        let t = chunk[0];
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(InputError(format!("sample {}: times must increase ({t} after {prev})", s + 1)));
            }
        }
        let m: Vec<c64> = chunk[1..].chunks(2).map(|p| c64::new(p[0], p[1])).collect();
        let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        for i in 0..k {
            for j in 0..=i {
                let d = (m[i * k + j] - m[j * k + i].conj()).norm();
                if d > HERMITIAN_TOL * scale {
                    return Err(InputError(format!("sample {} at t = {t}: entry ({i}, {j}) breaks Hermitian symmetry by {d:.3e}", s + 1)));
                }
            }
        }
        times.push(t);
        values.push(m);
    }
    Ok(Table { k, times, values })
}

impl Table {
    fn matrix(&self, idx: usize) -> CMat {
        let k = self.k;
        CMat::from_fn(k, k, |i, j| self.values[idx][i * k + j])
    }

    /// Piecewise-linear interpolant, constant beyond the first and last
    /// samples, with `K` the sampled range.
    pub fn into_path(self) -> Result<PotentialPath, CoreError> {
        let k = self.k;
        let grid = self.times.clone();
        let k_set = [(grid[0], *grid.last().unwrap())];
        let mats: Vec<CMat> = (0..self.times.len()).map(|i| self.matrix(i)).collect();
        let times = self.times;
        PotentialPath::from_fn(k, grid, move |t| {
            let n = times.len();
            if t <= times[0] {
                return mats[0].clone();
            }
            if t >= times[n - 1] {
                return mats[n - 1].clone();
            }
            let j = times.partition_point(|&x| x <= t) - 1;
            let w = (t - times[j]) / (times[j + 1] - times[j]);
            let (a, b) = (&mats[j], &mats[j + 1]);
            CMat::from_fn(k, k, |r, c| a[(r, c)] * (1.0 - w) + b[(r, c)] * w)
        })?
        .with_compact_set(&k_set)
    }
}
