//! Scenario configuration: a single JSON object, unknown keys rejected.

use std::fmt;
use std::path::PathBuf;

use indexlab_core::Tolerances;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Sf,
    Relind,
    Index1d,
    Cutpaste,
    Callias,
    Tower,
    Appendix,
    All,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::Sf,
        ScenarioKind::Relind,
        ScenarioKind::Index1d,
        ScenarioKind::Cutpaste,
        ScenarioKind::Callias,
        ScenarioKind::Tower,
        ScenarioKind::Appendix,
        ScenarioKind::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Sf => "sf",
            ScenarioKind::Relind => "relind",
            ScenarioKind::Index1d => "index1d",
            ScenarioKind::Cutpaste => "cutpaste",
            ScenarioKind::Callias => "callias",
            ScenarioKind::Tower => "tower",
            ScenarioKind::Appendix => "appendix",
            ScenarioKind::All => "all",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::Sf => {
                "Spectral flow of the configured potential by branch crossings, by a trivialising partition and as the \
                 relative index of the endpoint projections, plus the same identity and the boundary pairing on seeded \
                 random paths. Writes eigenvalue branches for gnuplot."
            }
            ScenarioKind::Relind => {
                "Relative index of the endpoint positive projections of the configured potential against the trace of \
                 odd powers of their difference, and additivity on seeded projection triples."
            }
            ScenarioKind::Index1d => {
                "Index of the discretized line operator for the configured potential: agreement with the spectral flow \
                 and the diagonal closed form, constancy over couplings lambda0, 2 lambda0, 5 lambda0, the Fredholm \
                 lower bound, and invariance under seeded compactly supported bumps."
            }
            ScenarioKind::Cutpaste => {
                "Cut-and-paste additivity on seeded collar-compatible pairs, index invariance under cylindrical-end and \
                 collar-flattening surgeries, and the reduction to half-cylinders."
            }
            ScenarioKind::Callias => {
                "Index against the pairing of positive projections with the boundary of K, for the configured potential \
                 and for seeded fibered families with two targets per fiber."
            }
            ScenarioKind::Tower => {
                "Stabilization of the index along truncation towers with relatively compact perturbations, and of the \
                 relative index of their positive projections."
            }
            ScenarioKind::Appendix => {
                "Seeded property suites for the operator inequalities (interpolation, conjugation, bounded transform \
                 continuity, relative bounds) and tower-tail compactness proxies, plus the resolvent identity, the \
                 difference integral and the resolvent quadrature."
            }
            ScenarioKind::All => "Every scenario above, in the order listed.",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Tanh,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SeededPotential {
    #[serde(default)]
    pub seed: Option<u64>,
    pub k: usize,
    #[serde(default = "one")]
    pub intervals: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialSpec {
    Builtin(Builtin),
    /// Diagonal entries: `tanh`, `-tanh`, `linear`, `-linear` or a number.
    Diag(Vec<String>),
    Seeded(SeededPotential),
    /// Tabulated samples.
    File(PathBuf),
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Builtin(Builtin::Tanh)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half-length `L`; automatic from the decay rule when absent.
    pub half_length: Option<f64>,
    pub n_cells: Option<usize>,
    /// Spacing bound, used when `n_cells` is absent. Default 0.05.
    pub h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum LambdaSpec {
    Value(f64),
    /// Resolved to `lambda0` of the configured potential at run time.
    Auto,
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::Auto
    }
}

pub const AUTO_LAMBDA_NAMES: [&str; 3] = ["auto-λ₀", "auto-lambda0", "auto"];

impl<'de> Deserialize<'de> for LambdaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Value(f64),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Value(v) => Ok(LambdaSpec::Value(v)),
            Raw::Name(s) if AUTO_LAMBDA_NAMES.contains(&s.as_str()) => Ok(LambdaSpec::Auto),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "expected a number or one of {AUTO_LAMBDA_NAMES:?}, got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub eig_tol: Option<f64>,
    pub svd_gap_cap: Option<f64>,
    pub rank_rel_tol: Option<f64>,
    pub proj_gap_tol: Option<f64>,
    pub integer_residual_tol: Option<f64>,
    pub crossing_tol: Option<f64>,
    pub hermitian_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            eig_tol: self.eig_tol.unwrap_or(base.eig_tol),
            svd_gap_cap: self.svd_gap_cap.unwrap_or(base.svd_gap_cap),
            rank_rel_tol: self.rank_rel_tol.unwrap_or(base.rank_rel_tol),
            proj_gap_tol: self.proj_gap_tol.unwrap_or(base.proj_gap_tol),
            integer_residual_tol: self.integer_residual_tol.unwrap_or(base.integer_residual_tol),
            crossing_tol: self.crossing_tol.unwrap_or(base.crossing_tol),
            hermitian_tol: self.hermitian_tol.unwrap_or(base.hermitian_tol),
        }
    }

    fn values(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("eig_tol", self.eig_tol),
            ("svd_gap_cap", self.svd_gap_cap),
            ("rank_rel_tol", self.rank_rel_tol),
            ("proj_gap_tol", self.proj_gap_tol),
            ("integer_residual_tol", self.integer_residual_tol),
            ("crossing_tol", self.crossing_tol),
            ("hermitian_tol", self.hermitian_tol),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AppendixConfig {
    /// Trials per inequality suite.
    #[serde(default = "default_appendix_trials")]
    pub trials: usize,
    /// Hypothesis levels for the bounded transform continuity suite.
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    /// Levels for the relative bound schedule.
    #[serde(default = "default_schedule_eps")]
    pub schedule_eps: Vec<f64>,
    /// Trials for the relative bound schedule.
    #[serde(default = "default_schedule_trials")]
    pub schedule_trials: usize,
    /// Test vectors per schedule entry.
    #[serde(default = "default_vectors")]
    pub vectors: usize,
    #[serde(default = "default_tower_dims")]
    pub tower_dims: Vec<usize>,
}

fn default_appendix_trials() -> usize {
    1000
}
fn default_eps() -> Vec<f64> {
    vec![0.01, 0.1, 0.4]
}
fn default_schedule_eps() -> Vec<f64> {
    vec![0.5, 0.1, 0.01]
}
fn default_schedule_trials() -> usize {
    100
}
fn default_vectors() -> usize {
    100
}
fn default_tower_dims() -> Vec<usize> {
    vec![16, 32, 64]
}

impl Default for AppendixConfig {
    fn default() -> Self {
        Self {
            trials: default_appendix_trials(),
            eps: default_eps(),
            schedule_eps: default_schedule_eps(),
            schedule_trials: default_schedule_trials(),
            vectors: default_vectors(),
            tower_dims: default_tower_dims(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Gnuplot,
}

impl Format {
    pub fn parse(name: &str) -> Option<Self> {
        match name.trim() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "gnuplot" => Some(Format::Gnuplot),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub potential: PotentialSpec,
    /// Overrides the compact set `K` of the configured potential.
    #[serde(default)]
    pub compact_set: Option<Vec<(f64, f64)>>,
    /// Largest fiber dimension drawn by the seeded suites.
    #[serde(default)]
    pub fiber_dim: Option<usize>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub lambda: LambdaSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Number of seeded cases per path-based suite; each scenario has its own default.
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub appendix: AppendixConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    1
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        parse_config(&format!("{{\"scenario\": \"{}\"}}", scenario.name())).expect("minimal config is valid")
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.apply(Tolerances::default())
    }
}

/// First problem found in a config, with its location when known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    /// Dotted path of the offending field, when known.
    pub field: Option<String>,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l}, column {c}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " in `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { field: Some(field.to_string()), line: None, column: None, message: message.into() }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError {
            field: if path == "." { None } else { Some(path) },
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: inner.to_string(),
        }
    })?;
    validate(&cfg)?;
    Ok(cfg)
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn validate(cfg: &ScenarioConfig) -> Result<(), ConfigError> {
    let g = &cfg.grid;
    if let Some(l) = g.half_length {
        positive("grid.half_length", l)?;
    }
    if let Some(h) = g.h {
        positive("grid.h", h)?;
    }
    match (g.half_length, g.n_cells, g.h) {
        (None, Some(_), _) => return Err(invalid("grid.n_cells", "needs grid.half_length; the automatic grid sets L itself")),
        (_, Some(n), _) if n < 2 => return Err(invalid("grid.n_cells", "needs at least 2 cells")),
        (_, Some(_), Some(_)) => return Err(invalid("grid.h", "give either grid.n_cells or grid.h, not both")),
        _ => {}
    }
    if let LambdaSpec::Value(l) = cfg.lambda {
        positive("lambda", l)?;
    }
    if let Some(k) = cfg.fiber_dim {
        if !(1..=8).contains(&k) {
            return Err(invalid("fiber_dim", format!("must lie in 1..=8, got {k}")));
        }
    }
    if cfg.trials == Some(0) {
        return Err(invalid("trials", "must be positive"));
    }
    if let Some(k) = &cfg.compact_set {
        for (i, &(a, b)) in k.iter().enumerate() {
            if !(a < b && a.is_finite() && b.is_finite()) {
                return Err(invalid(&format!("compact_set[{i}]"), format!("need a < b, got [{a}, {b}]")));
            }
        }
    }
    match &cfg.potential {
        PotentialSpec::Diag(entries) => {
            if entries.is_empty() {
                return Err(invalid("potential.diag", "needs at least one entry"));
            }
            for (i, e) in entries.iter().enumerate() {
                if crate::potential::diag_entry(e).is_none() {
                    return Err(invalid(&format!("potential.diag[{i}]"), format!("unknown entry {e:?}")));
                }
            }
        }
        PotentialSpec::Seeded(s) => {
            if !(1..=8).contains(&s.k) {
                return Err(invalid("potential.seeded.k", format!("must lie in 1..=8, got {}", s.k)));
            }
            if !(1..=3).contains(&s.intervals) {
                return Err(invalid("potential.seeded.intervals", format!("must lie in 1..=3, got {}", s.intervals)));
            }
        }
        _ => {}
    }
    for (name, v) in cfg.tolerances.values() {
        if let Some(v) = v {
            positive(&format!("tolerances.{name}"), v)?;
        }
    }
    let a = &cfg.appendix;
    for (i, &e) in a.eps.iter().enumerate() {
        positive(&format!("appendix.eps[{i}]"), e)?;
    }
    for (i, &e) in a.schedule_eps.iter().enumerate() {
        positive(&format!("appendix.schedule_eps[{i}]"), e)?;
    }
    if a.tower_dims.is_empty() || a.tower_dims[0] < 2 || a.tower_dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("appendix.tower_dims", "must be strictly increasing sizes >= 2"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_callias_config() {
        let c = parse_config(r#"{"scenario": "callias", "potential": {"builtin": "tanh"}}"#).unwrap();
        assert_eq!(c.scenario, ScenarioKind::Callias);
        assert_eq!(c.lambda, LambdaSpec::Auto);
        assert_eq!(c.seed, 1);
    }

    #[test]
    fn auto_lambda_spellings() {
        for name in AUTO_LAMBDA_NAMES {
            let c = parse_config(&format!(r#"{{"scenario": "index1d", "lambda": "{name}"}}"#)).unwrap();
            assert_eq!(c.lambda, LambdaSpec::Auto);
        }
        let c = parse_config(r#"{"scenario": "index1d", "lambda": 2.5}"#).unwrap();
        assert_eq!(c.lambda, LambdaSpec::Value(2.5));
        assert!(parse_config(r#"{"scenario": "index1d", "lambda": "big"}"#).is_err());
    }

    #[test]
    fn misspelled_scenario_names_field() {
        let e = parse_config(r#"{"scenario": "calias"}"#).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("scenario"));
        assert!(e.message.contains("calias"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_config("{\n  \"scenario\": \"sf\",\n  \"seeds\": 3\n}").unwrap_err();
        assert!(e.message.contains("seeds"), "{e}");
        assert_eq!(e.line, Some(3));
        let e = parse_config(r#"{"scenario": "sf", "grid": {"cells": 3}}"#).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("grid.cells"));
    }

    #[test]
    fn type_mismatch_reported() {
        let e = parse_config(r#"{"scenario": "sf", "seed": "x"}"#).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("seed"));
    }

    #[test]
    fn invariants_checked() {
        let e = parse_config(r#"{"scenario": "sf", "grid": {"n_cells": 10}}"#).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("grid.n_cells"));
        let e = parse_config(r#"{"scenario": "sf", "lambda": -1}"#).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("lambda"));
        let e = parse_config(r#"{"scenario": "sf", "potential": {"diag": ["tanh", "sinh"]}}"#).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("potential.diag[1]"));
    }

    #[test]
    fn potential_variants_parse() {
        let c = parse_config(r#"{"scenario": "sf", "potential": {"seeded": {"k": 3, "intervals": 2}}}"#).unwrap();
        assert_eq!(c.potential, PotentialSpec::Seeded(SeededPotential { seed: None, k: 3, intervals: 2 }));
        let c = parse_config(r#"{"scenario": "sf", "potential": {"file": "a.txt"}}"#).unwrap();
        assert_eq!(c.potential, PotentialSpec::File("a.txt".into()));
        assert!(parse_config(r#"{"scenario": "sf", "potential": {"seeded": {"k": 3, "extra": 1}}}"#).is_err());
    }

    #[test]
    fn tolerance_overrides_apply() {
        let c = parse_config(r#"{"scenario": "sf", "tolerances": {"proj_gap_tol": 1e-6}}"#).unwrap();
        assert_eq!(c.tolerances().proj_gap_tol, 1e-6);
        assert_eq!(c.tolerances().eig_tol, Tolerances::default().eig_tol);
    }
}
