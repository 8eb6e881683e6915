//! Check builders, one task per seeded case.

use std::sync::Arc;
use std::time::Instant;

use indexlab_core::appendixprops::{
    self as ap, CompactnessOptions, RandomSpec, Structure, SuiteSummary, TailFunction, TailOptions,
};
use indexlab_core::callias::{
    callias_check, callias_check_fibered, interval_flow_identity, tower_callias, CalliasOptions, CalliasReport,
    TowerCalliasOptions,
};
use indexlab_core::dirac1d::{
    assemble, fredholm_bounds, fredholm_constants, kernel_oracle_diagonal, kernel_vectors, lambda_sweep,
    perturbations_invariance, profile_error, solve_index, BoundaryCondition, GridSpec, IndexOptions, BOUND_FRACTION,
};
use indexlab_core::opcore::{inv_sqrt_via_quadrature, positive_projection, Template, TruncationTower};
use indexlab_core::relindex::{check_additivity, rel_index, rel_index_odd_power, restricted_index, ProjectionPair};
use indexlab_core::scenarios::{
    collar_compatible_pair, random_callias_family, random_index_path, random_invertible_hermitian, random_line_path,
    random_sf_path, rng, seeded_bump, sub_seed, unit_gap_path,
};
use indexlab_core::specflow::{sf_crossings, CrossingOptions, PotentialPath};
use indexlab_core::surgery::{
    collar_flatten, cylinder_reduction, cylindrical_end, surgery_invariance, verify_additivity, CutPasteReport,
    SurgeryProfile,
};
use indexlab_core::{c64, Error as CoreError, HermitianOperator, Result as CoreResult, Tolerances};
use serde_json::{json, Value};

use crate::config::{LambdaSpec, ScenarioConfig, ScenarioKind};
use crate::potential::LoadedPotential;
use crate::report::{Branches, Outcome, Record};

pub mod anchor {
    pub const SF_IDENTITY: &str =
        "spectral flow by crossings = by partition = rel-ind(P+(S(end)), P+(S(start))) = boundary pairing";
    pub const REL_TRACE: &str = "rel-ind(P, Q) = tr(P - Q) = tr((P - Q)^(2m+1))";
    pub const REL_RESTRICTED: &str = "rel-ind(P, Q) = index of Q: Ran P -> Ran Q";
    pub const REL_ADDITIVE: &str = "rel-ind(P, R) = rel-ind(P, Q) + rel-ind(Q, R)";
    pub const INDEX_FLOW: &str = "index of -i d/dt - i lambda S = spectral flow of S";
    pub const CLOSED_FORM: &str = "commuting S: kernel from branches negative at -L and positive at +L";
    pub const KERNEL_PROFILE: &str = "kernel of -i d/dt - i lambda tanh is spanned by cosh^(-lambda)";
    pub const LAMBDA: &str = "index independent of the coupling lambda >= lambda0";
    pub const FREDHOLM: &str = "D~^2 + f^2 >= eps with eps = (lambda0^2 c^2 - delta^2 (1 + 1/c)^2) / 2";
    pub const FREDHOLM_REFINE: &str = "Fredholm bound deficit does not grow under h -> h/2";
    pub const UNIT_COUPLING: &str = "delta_hat < c_hat^2 / (c_hat + 1) gives lambda0 = 1";
    pub const BUMP: &str = "index unchanged by perturbations supported in K";
    pub const RELATIVE_INDEX: &str = "ind(M1) + ind(M2) = ind(M3) + ind(M4) after exchange along a collar";
    pub const CYLINDRICAL_END: &str = "cylindrical ends preserve the index";
    pub const COLLAR_FLATTEN: &str = "collar flattening preserves the index";
    pub const REDUCTION: &str = "index = sum over half-cylinder pieces = boundary pairing";
    pub const CALLIAS: &str = "index = pairing of P+(S) with the boundary of K, per fiber";
    pub const CALLIAS_TARGET: &str = "boundary pairing independent of the reference operator";
    pub const TOWER: &str = "index stabilizes along a truncation tower with relatively compact perturbation";
    pub const INTERPOLATION: &str = "|T^(-1/2) S T^(-1/2)| <= |S T^(-1)| and |T S T^(-1)| = |T^(-1) S T|";
    pub const CONJUGATION: &str = "|F| <= |T^(-1/2) F T^(1/2)| = |T^(1/2) F T^(-1/2)|";
    pub const TRANSFORM: &str = "|F_T - F_Tn| <= 4 eps when |(T - Tn)(T + i)^(-1)| <= eps < 1/2";
    pub const SCHEDULE: &str = "|R psi| <= eps |T psi| + eps n |psi| with n minimal for |R (T - i n)^(-1)| < eps";
    pub const SCHEDULE_TOWER: &str = "relative bound schedule along a truncation tower";
    pub const TAILS: &str = "tails of f(T + R) - f(T) decay along the tower for relatively compact R";
    pub const COMPACT: &str = "|K (1 - Pi_n)| and |(1 - Pi_n) K| -> 0 for compact K";
    pub const RESOLVENT: &str = "(T + R + z)^(-1) - (T + z)^(-1) = -(T + R + z)^(-1) R (T + z)^(-1)";
    pub const QUADRATURE: &str = "(1 + T^2)^(-1/2) by resolvent quadrature";
    pub const DIFFERENCE: &str = "integral formula for T (1 + (T + R)^2)^(-1/2) - T (1 + T^2)^(-1/2)";
}

/// Spacing used when the config gives none.
pub const DEFAULT_H: f64 = 0.05;

pub struct Context {
    pub cfg: ScenarioConfig,
    pub potential: LoadedPotential,
    pub tol: Tolerances,
}

#[derive(Default)]
pub struct TaskOutput {
    pub records: Vec<Record>,
    pub branches: Option<Branches>,
}

pub struct Task {
    /// Canonical inputs of the task; its digest is stamped on each record.
    pub inputs: Value,
    pub job: Box<dyn FnOnce() -> TaskOutput + Send>,
}

type Ctx = Arc<Context>;

impl Context {
    fn trials(&self, default: usize) -> usize {
        self.cfg.trials.unwrap_or(default)
    }

    fn kmax(&self, default: usize) -> usize {
        self.cfg.fiber_dim.unwrap_or(default)
    }

    fn seed(&self, tag: u64, i: usize) -> u64 {
        sub_seed(sub_seed(self.cfg.seed, tag), i as u64)
    }

    fn index_opts(&self, refine: bool) -> IndexOptions {
        IndexOptions { tol: self.tol, refine }
    }

    fn inputs(&self, check: &str, extra: Value) -> Value {
        json!({
            "check": check,
            "seed": self.cfg.seed,
            "potential": self.potential.description,
            "grid": self.cfg.grid,
            "lambda": self.cfg.lambda,
            "tolerances": self.cfg.tolerances,
            "fiber_dim": self.cfg.fiber_dim,
            "case": extra,
        })
    }

    /// Coupling and grid for the configured potential.
    pub fn resolve(&self) -> CoreResult<Resolved> {
        let path = &self.potential.path;
        let g = &self.cfg.grid;
        let h = g.h.unwrap_or(DEFAULT_H);
        let fixed = match (g.half_length, g.n_cells) {
            (Some(l), Some(n)) => Some(GridSpec::new(l, n)?),
            (Some(l), None) => Some(GridSpec::with_spacing(l, h)?),
            _ => None,
        };
        let probe = match fixed {
            Some(grid) => grid,
            None => GridSpec::auto(path, h)?,
        };
        let lambda0 = fredholm_constants(path, &probe)?.lambda0;
        let lambda = match self.cfg.lambda {
            LambdaSpec::Value(v) => v,
            LambdaSpec::Auto => lambda0,
        };
        let grid = match fixed {
            Some(grid) => grid,
            None => GridSpec::auto_coupled(path, lambda0.min(lambda), h)?,
        };
        Ok(Resolved { grid, lambda, lambda0 })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Resolved {
    pub grid: GridSpec,
    pub lambda: f64,
    pub lambda0: f64,
}

fn timed(name: String, anchor: &'static str, f: impl FnOnce() -> CoreResult<Record>) -> Record {
    let start = Instant::now();
    let mut r = f().unwrap_or_else(|e| Record::from_error(name, anchor, &e));
    r.seconds = Some(start.elapsed().as_secs_f64());
    r
}

fn single(inputs: Value, name: String, anchor: &'static str, f: impl FnOnce() -> CoreResult<Record> + Send + 'static) -> Task {
    Task { inputs, job: Box::new(move || TaskOutput { records: vec![timed(name, anchor, f)], branches: None }) }
}

fn multi(inputs: Value, f: impl FnOnce() -> Vec<Record> + Send + 'static) -> Task {
    Task { inputs, job: Box::new(move || TaskOutput { records: f(), branches: None }) }
}

/// Tasks for `kind`, in declaration order.
pub fn tasks(ctx: &Ctx, kind: ScenarioKind) -> Vec<Task> {
    match kind {
        ScenarioKind::Sf => sf(ctx),
        ScenarioKind::Relind => relind(ctx),
        ScenarioKind::Index1d => index1d(ctx),
        ScenarioKind::Cutpaste => cutpaste(ctx),
        ScenarioKind::Callias => callias(ctx),
        ScenarioKind::Tower => tower(ctx),
        ScenarioKind::Appendix => appendix(ctx),
        ScenarioKind::All => ScenarioKind::ALL
            .into_iter()
            .filter(|&k| k != ScenarioKind::All)
            .flat_map(|k| tasks(ctx, k))
            .collect(),
    }
}

fn flow_record(name: String, path: &PotentialPath, tol: &Tolerances) -> CoreResult<Record> {
    let r = interval_flow_identity(path, None, tol)?;
    Ok(Record::new(name, anchor::SF_IDENTITY, r.crossings, vec![r.partition, r.relative_index, r.pairing], r.holds))
}

fn sf(ctx: &Ctx) -> Vec<Task> {
    let mut out = Vec::new();
    let c = ctx.clone();
    out.push(Task {
        inputs: ctx.inputs("sf.identity", json!(null)),
        job: Box::new(move || {
            let path = &c.potential.path;
            let rec = timed("sf.identity".into(), anchor::SF_IDENTITY, || flow_record("sf.identity".into(), path, &c.tol));
            let branches = sf_crossings(path, &CrossingOptions { tol: c.tol, ..Default::default() })
                .ok()
                .map(|r| Branches { times: path.grid().to_vec(), values: r.branches });
            TaskOutput { records: vec![rec], branches }
        }),
    });
    let kmax = ctx.kmax(8);
    for i in 0..ctx.trials(20) {
        let seed = ctx.seed(1, i);
        let k = 1 + (seed % kmax as u64) as usize;
        let name = format!("sf.identity.seeded[{i}]");
        let c = ctx.clone();
        out.push(single(ctx.inputs(&name, json!({ "seed": seed, "k": k, "samples": 64 })), name.clone(), anchor::SF_IDENTITY, move || {
            flow_record(name, &random_sf_path(seed, k, 64)?, &c.tol)
        }));
    }
    out
}

fn endpoint_pair(path: &PotentialPath, tol: &Tolerances) -> CoreResult<ProjectionPair> {
    let p1 = positive_projection(&path.sample(path.end())?, tol.proj_gap_tol)?;
    let p0 = positive_projection(&path.sample(path.start())?, tol.proj_gap_tol)?;
    ProjectionPair::new(p1, p0)
}

fn odd_power_record(name: String, pair: &ProjectionPair, tol: &Tolerances) -> CoreResult<Record> {
    let idx = rel_index(pair, tol)?;
    let worst = [1u32, 2, 3]
        .into_iter()
        .map(|m| rel_index_odd_power(pair, m).map(|v| (v - idx as f64).abs()))
        .collect::<CoreResult<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let cubic = rel_index_odd_power(pair, 1)?;
    Ok(Record::new(name, anchor::REL_TRACE, idx, cubic, worst <= tol.integer_residual_tol).with_residual(worst))
}

fn relind(ctx: &Ctx) -> Vec<Task> {
    let mut out = Vec::new();
    let c = ctx.clone();
    out.push(single(ctx.inputs("relind.trace", json!(null)), "relind.trace".into(), anchor::REL_TRACE, move || {
        odd_power_record("relind.trace".into(), &endpoint_pair(&c.potential.path, &c.tol)?, &c.tol)
    }));
    let c = ctx.clone();
    out.push(single(ctx.inputs("relind.restricted", json!(null)), "relind.restricted".into(), anchor::REL_RESTRICTED, move || {
        let pair = endpoint_pair(&c.potential.path, &c.tol)?;
        let idx = rel_index(&pair, &c.tol)?;
        let res = restricted_index(&pair.p, &pair.q, &c.tol)?;
        Ok(Record::new("relind.restricted", anchor::REL_RESTRICTED, idx, res, idx == res))
    }));
    let kmax = ctx.kmax(8);
    for i in 0..ctx.trials(20) {
        let seed = ctx.seed(2, i);
        let k = 1 + (seed % kmax as u64) as usize;
        let name = format!("relind.additivity[{i}]");
        let c = ctx.clone();
        out.push(multi(ctx.inputs(&name, json!({ "seed": seed, "k": k })), move || {
            let mut g = rng(seed);
            let projections: CoreResult<Vec<_>> = (0..3)
                .map(|_| positive_projection(&random_invertible_hermitian(&mut g, k, 0.2, 2.0), c.tol.proj_gap_tol))
                .collect();
            let trace_name = format!("relind.trace[{i}]");
            let add = timed(name.clone(), anchor::REL_ADDITIVE, || {
                let ps = projections.clone()?;
                let r = check_additivity(&ps[0], &ps[1], &ps[2], &c.tol)?;
                Ok(Record::new(name, anchor::REL_ADDITIVE, r.pr, r.pq + r.qr, r.holds))
            });
            let trace = timed(trace_name.clone(), anchor::REL_TRACE, || {
                let ps = projections?;
                odd_power_record(trace_name, &ProjectionPair::new(ps[0].clone(), ps[1].clone())?, &c.tol)
            });
            vec![add, trace]
        }));
    }
    out
}

fn tanh_profile_error(path: &PotentialPath, r: &Resolved, tol: &Tolerances) -> CoreResult<f64> {
    let op = assemble(path, r.grid, BoundaryCondition::Aps, r.lambda, tol)?;
    let kv = kernel_vectors(&op, tol)?;
    if kv.len() != 1 {
        return Err(CoreError::TheoremViolation(format!("expected a one-dimensional kernel, found {}", kv.len())));
    }
    let vals: Vec<c64> = (0..kv[0].nrows()).map(|i| kv[0][(i, 0)]).collect();
    let lambda = r.lambda;
    Ok(profile_error(&vals, &r.grid.nodes(), |t| t.cosh().powf(-lambda)))
}

/// Fredholm bound on `[-8, 8]` at spacing 0.2 and 0.1.
pub fn fredholm_refinement(path: &PotentialPath, tol: &Tolerances) -> CoreResult<(f64, [f64; 2], [f64; 2], bool)> {
    let coarse_grid = GridSpec::with_spacing(8.0, 0.2)?;
    let lambda = fredholm_constants(path, &coarse_grid)?.lambda0;
    let coarse = fredholm_bounds(path, lambda, None, coarse_grid, tol)?;
    let fine = fredholm_bounds(path, lambda, None, coarse_grid.refined(), tol)?;
    let eps = coarse.constants.epsilon;
    Ok((eps, [coarse.min_eig, fine.min_eig], [coarse.deficit, fine.deficit], coarse.pass && fine.pass))
}

fn index1d(ctx: &Ctx) -> Vec<Task> {
    let mut out = Vec::new();

    let c = ctx.clone();
    out.push(single(ctx.inputs("index1d.spectral_flow", json!(null)), "index1d.spectral_flow".into(), anchor::INDEX_FLOW, move || {
        let r = c.resolve()?;
        let path = &c.potential.path;
        let idx = solve_index(path, r.grid, r.lambda, &c.index_opts(true))?;
        let flow = sf_crossings(path, &CrossingOptions { tol: c.tol, ..Default::default() })?.flow;
        Ok(Record::new("index1d.spectral_flow", anchor::INDEX_FLOW, idx.index, flow, idx.index == flow))
    }));

    let c = ctx.clone();
    out.push(single(ctx.inputs("index1d.closed_form", json!(null)), "index1d.closed_form".into(), anchor::CLOSED_FORM, move || {
        let r = c.resolve()?;
        let path = &c.potential.path;
        let oracle = kernel_oracle_diagonal(path, &r.grid)?;
        let idx = solve_index(path, r.grid, r.lambda, &c.index_opts(true))?;
        let got = vec![idx.dim_ker as i64, idx.dim_coker as i64];
        let want = vec![oracle.dim_ker as i64, oracle.dim_coker as i64];
        Ok(Record::new("index1d.closed_form", anchor::CLOSED_FORM, got.clone(), want.clone(), got == want))
    }));

    if ctx.potential.is_tanh {
        let c = ctx.clone();
        out.push(single(ctx.inputs("index1d.kernel_profile", json!(null)), "index1d.kernel_profile".into(), anchor::KERNEL_PROFILE, move || {
            let r = c.resolve()?;
            let err = tanh_profile_error(&c.potential.path, &r, &c.tol)?;
            let ok = err <= 1e-3;
            Ok(Record::new("index1d.kernel_profile", anchor::KERNEL_PROFILE, err, 1e-3, ok).with_residual(err))
        }));
    }

    let c = ctx.clone();
    out.push(single(ctx.inputs("index1d.lambda_sweep", json!(null)), "index1d.lambda_sweep".into(), anchor::LAMBDA, move || {
        let r = c.resolve()?;
        let l0 = r.lambda0;
        let sweep = lambda_sweep(&c.potential.path, &[l0, 2.0 * l0, 5.0 * l0], r.grid, &c.index_opts(true))?;
        Ok(Record::new("index1d.lambda_sweep", anchor::LAMBDA, sweep.indices.clone(), sweep.indices[0], sweep.constant))
    }));

    let c = ctx.clone();
    out.push(single(ctx.inputs("index1d.fredholm_bound", json!(null)), "index1d.fredholm_bound".into(), anchor::FREDHOLM, move || {
        let r = c.resolve()?;
        let b = fredholm_bounds(&c.potential.path, r.lambda, None, r.grid, &c.tol)?;
        let need = BOUND_FRACTION * b.constants.epsilon;
        Ok(Record::new("index1d.fredholm_bound", anchor::FREDHOLM, b.min_eig, need, b.pass).with_residual(b.deficit))
    }));

    let bumps = ctx.trials(5);
    let seeds: Vec<u64> = (0..bumps).map(|i| ctx.seed(3, i)).collect();
    let c = ctx.clone();
    out.push(multi(ctx.inputs("index1d.bumps", json!({ "seeds": seeds })), move || {
        let names: Vec<String> = (0..seeds.len()).map(|i| format!("index1d.bump[{i}]")).collect();
        let start = Instant::now();
        let run = || -> CoreResult<(i64, Vec<i64>)> {
            let r = c.resolve()?;
            let path = &c.potential.path;
            let within = path.compact_hull().ok_or_else(|| CoreError::HypothesisUnmet("K is empty".into()))?;
            let bs = seeds
                .iter()
                .map(|&s| seeded_bump(s, path.fiber_dim(), within, path.grid().to_vec()))
                .collect::<CoreResult<Vec<_>>>()?;
            perturbations_invariance(path, &bs, r.grid, r.lambda, &c.index_opts(false))
        };
        let result = run();
        let each = start.elapsed().as_secs_f64() / names.len().max(1) as f64;
        names
            .into_iter()
            .enumerate()
            .map(|(i, name)| {
                let mut rec = match &result {
                    Ok((base, ps)) => Record::new(name, anchor::BUMP, ps[i], *base, ps[i] == *base),
                    Err(e) => Record::from_error(name, anchor::BUMP, e),
                };
                rec.seconds = Some(each);
                rec
            })
            .collect()
    }));

    let kmax = ctx.kmax(4);
    for i in 0..ctx.trials(5) {
        let seed = ctx.seed(4, i);
        let k = 1 + (seed % kmax as u64) as usize;
        let name = format!("index1d.fredholm_seeded[{i}]");
        let c = ctx.clone();
        out.push(multi(ctx.inputs(&name, json!({ "seed": seed, "k": k })), move || {
            let start = Instant::now();
            let result = random_index_path(seed, k).and_then(|p| fredholm_refinement(&p, &c.tol));
            let secs = Some(start.elapsed().as_secs_f64() / 2.0);
            let refine_name = format!("index1d.fredholm_refinement[{i}]");
            let mut recs = match result {
                Ok((eps, mins, deficits, pass)) => vec![
                    Record::new(name, anchor::FREDHOLM, mins[0].min(mins[1]), BOUND_FRACTION * eps, pass),
                    Record::new(refine_name, anchor::FREDHOLM_REFINE, deficits[1], deficits[0], deficits[1] <= deficits[0]),
                ],
                Err(e) => vec![Record::from_error(name, anchor::FREDHOLM, &e), Record::from_error(refine_name, anchor::FREDHOLM_REFINE, &e)],
            };
            recs.iter_mut().for_each(|r| r.seconds = secs);
            recs
        }));
    }

    out.push(single(ctx.inputs("index1d.unit_coupling", json!(null)), "index1d.unit_coupling".into(), anchor::UNIT_COUPLING, || {
        let c = fredholm_constants(&unit_gap_path(), &GridSpec::with_spacing(8.0, 0.05)?)?;
        let threshold = c.c_hat * c.c_hat / (c.c_hat + 1.0);
        let ok = c.unit_coupling && c.lambda0 == 1.0 && c.delta_hat < threshold;
        Ok(Record::new("index1d.unit_coupling", anchor::UNIT_COUPLING, c.delta_hat, threshold, ok).with_residual(threshold - c.delta_hat))
    }));
    out
}

/// Largest `lambda0` over `paths` (at least `floor`) and the coupled grid of the first.
pub fn common_coupling(paths: &[&PotentialPath], floor: f64, h: f64) -> CoreResult<(f64, GridSpec)> {
    let probe = GridSpec::auto(paths[0], h)?;
    let mut lambda = floor;
    for p in paths {
        lambda = lambda.max(fredholm_constants(p, &probe)?.lambda0);
    }
    Ok((lambda, GridSpec::auto_coupled(paths[0], lambda, h)?))
}

pub fn cylindrical_end_check(path: &PotentialPath, opts: &IndexOptions) -> CoreResult<(i64, i64, bool)> {
    let (a, b) = path.compact_hull().ok_or_else(|| CoreError::HypothesisUnmet("K is empty".into()))?;
    let modified = cylindrical_end(path, &SurgeryProfile::new(a, b, 0.5)?)?;
    let (lambda, grid) = common_coupling(&[path, &modified], 1.0, 0.2)?;
    let r = surgery_invariance(path, &modified, grid, lambda, opts)?;
    Ok((r.before, r.after, r.preserved))
}

pub fn collar_flatten_check(path: &PotentialPath, target: &HermitianOperator, opts: &IndexOptions) -> CoreResult<(i64, i64, bool)> {
    let modified = collar_flatten(path, target, &SurgeryProfile::collar(0.2)?)?;
    let (lambda, grid) = common_coupling(&[path, &modified], 1.0, 0.2)?;
    let r = surgery_invariance(path, &modified, grid, lambda, opts)?;
    Ok((r.before, r.after, r.preserved))
}

/// Cut-and-paste at coupling 3, or at the largest `lambda0` when that is higher.
pub fn cutting_report(
    m1: &PotentialPath,
    m2: &PotentialPath,
    t_cut: f64,
    collar: (f64, f64),
    opts: &IndexOptions,
) -> CoreResult<CutPasteReport> {
    match verify_additivity(m1, m2, t_cut, collar, Some(3.0), None, 0.2, opts) {
        Err(CoreError::HypothesisUnmet(_)) => verify_additivity(m1, m2, t_cut, collar, None, None, 0.2, opts),
        other => other,
    }
}

fn surgery_record(name: String, anchor: &'static str, r: (i64, i64, bool)) -> Record {
    Record::new(name, anchor, r.1, r.0, r.2)
}

fn cutpaste(ctx: &Ctx) -> Vec<Task> {
    let mut out = Vec::new();
    let fast = ctx.index_opts(false);
    let kmax = ctx.kmax(3);
    let n = ctx.trials(3);
    for i in 0..n {
        let seed = ctx.seed(5, i);
        let k = 1 + (seed % kmax as u64) as usize;
        let name = format!("cutpaste.additivity[{i}]");
        out.push(single(ctx.inputs(&name, json!({ "seed": seed, "k": k })), name.clone(), anchor::RELATIVE_INDEX, move || {
            let pair = collar_compatible_pair(seed, k)?;
            let r = cutting_report(&pair.first, &pair.second, pair.t_cut, pair.collar, &fast)?;
            Ok(Record::new(name, anchor::RELATIVE_INDEX, r.indices[0] + r.indices[1], r.indices[2] + r.indices[3], r.holds))
        }));
    }
    let seed = ctx.seed(5, n);
    out.push(single(ctx.inputs("cutpaste.degenerate", json!({ "seed": seed })), "cutpaste.degenerate".into(), anchor::RELATIVE_INDEX, move || {
        let pair = collar_compatible_pair(seed, 2)?;
        let r = cutting_report(&pair.first, &pair.first, pair.t_cut, pair.collar, &fast)?;
        Ok(Record::new("cutpaste.degenerate", anchor::RELATIVE_INDEX, r.indices[0] + r.indices[1], r.indices[2] + r.indices[3], r.holds))
    }));
    for i in 0..n {
        let seed = ctx.seed(6, i);
        let k = 1 + (seed % kmax as u64) as usize;
        let name = format!("cutpaste.cylindrical_end[{i}]");
        out.push(single(ctx.inputs(&name, json!({ "seed": seed, "k": k })), name.clone(), anchor::CYLINDRICAL_END, move || {
            Ok(surgery_record(name, anchor::CYLINDRICAL_END, cylindrical_end_check(&random_index_path(seed, k)?, &fast)?))
        }));
    }
    for i in 0..n {
        let seed = ctx.seed(7, i);
        let k = 1 + (seed % kmax as u64) as usize;
        let name = format!("cutpaste.collar_flatten[{i}]");
        out.push(single(ctx.inputs(&name, json!({ "seed": seed, "k": k })), name.clone(), anchor::COLLAR_FLATTEN, move || {
            let target = random_invertible_hermitian(&mut rng(sub_seed(seed, 9)), k, 0.5, 2.0);
            Ok(surgery_record(name, anchor::COLLAR_FLATTEN, collar_flatten_check(&random_index_path(seed, k)?, &target, &fast)?))
        }));
    }
    let seed = ctx.seed(8, 0);
    out.push(single(ctx.inputs("cutpaste.reduction", json!({ "seed": seed })), "cutpaste.reduction".into(), anchor::REDUCTION, move || {
        let path = random_line_path(seed, 3, &[(-3.0, -1.0), (1.0, 3.0)], 12.0, 121, 0.5)?;
        let target = HermitianOperator::from_real_diagonal(&[1.0, -1.0, 1.5]);
        let (lambda, grid) = common_coupling(&[&path], 3.0, 0.2)?;
        let r = cylinder_reduction(&path, &target, 0.2, lambda, grid, &fast)?;
        Ok(Record::new("cutpaste.reduction", anchor::REDUCTION, vec![r.original, r.flattened], r.pieces.clone(), r.holds))
    }));

    let c = ctx.clone();
    out.push(single(ctx.inputs("cutpaste.cylindrical_end", json!(null)), "cutpaste.cylindrical_end".into(), anchor::CYLINDRICAL_END, move || {
        Ok(surgery_record("cutpaste.cylindrical_end".into(), anchor::CYLINDRICAL_END, cylindrical_end_check(&c.potential.path, &fast)?))
    }));
    let c = ctx.clone();
    out.push(single(ctx.inputs("cutpaste.collar_flatten", json!(null)), "cutpaste.collar_flatten".into(), anchor::COLLAR_FLATTEN, move || {
        let target = HermitianOperator::scalar(c.potential.path.fiber_dim(), -1.0);
        Ok(surgery_record("cutpaste.collar_flatten".into(), anchor::COLLAR_FLATTEN, collar_flatten_check(&c.potential.path, &target, &fast)?))
    }));
    out
}

fn callias_records(base: &str, result: CoreResult<CalliasReport>) -> Vec<Record> {
    let target_name = format!("{base}.target_independence");
    match result {
        Ok(r) => {
            let mut recs = vec![Record::new(base, anchor::CALLIAS, r.lhs.clone(), r.rhs.clone(), r.pass)];
            recs.push(Record::new(target_name, anchor::CALLIAS_TARGET, r.rhs.clone(), r.rhs_alt.clone(), r.rhs == r.rhs_alt));
            if let Some(total) = r.total {
                let sum: i64 = r.lhs.iter().sum();
                recs.push(Record::new(format!("{base}.total"), anchor::CALLIAS, total, sum, total == sum));
            }
            recs
        }
        Err(e) => vec![Record::from_error(base, anchor::CALLIAS, &e), Record::from_error(target_name, anchor::CALLIAS_TARGET, &e)],
    }
}

fn with_time(mut recs: Vec<Record>, start: Instant) -> Vec<Record> {
    let each = start.elapsed().as_secs_f64() / recs.len().max(1) as f64;
    recs.iter_mut().for_each(|r| r.seconds = Some(each));
    recs
}

fn callias(ctx: &Ctx) -> Vec<Task> {
    let mut out = Vec::new();
    let c = ctx.clone();
    let seed = ctx.seed(9, 0);
    out.push(multi(ctx.inputs("callias", json!({ "target_seed": seed })), move || {
        let start = Instant::now();
        let path = &c.potential.path;
        let target = random_invertible_hermitian(&mut rng(seed), path.fiber_dim(), 0.5, 2.0);
        let alt = HermitianOperator::scalar(path.fiber_dim(), -1.0);
        let lambda = match c.cfg.lambda {
            LambdaSpec::Value(v) => v,
            LambdaSpec::Auto => 1.0,
        };
        let opts = CalliasOptions { index: c.index_opts(false), lambda, ..Default::default() };
        with_time(callias_records("callias", callias_check(path, &target, &alt, &opts)), start)
    }));
    let kmax = ctx.kmax(4);
    for i in 0..ctx.trials(5) {
        let seed = ctx.seed(10, i);
        let fibers = 1 + i % 4;
        let intervals = 1 + i % 3;
        let name = format!("callias.family[{i}]");
        let c = ctx.clone();
        let inputs = ctx.inputs(&name, json!({ "seed": seed, "fibers": fibers, "intervals": intervals, "k_max": kmax }));
        out.push(multi(inputs, move || {
            let start = Instant::now();
            let opts = CalliasOptions { index: c.index_opts(false), ..Default::default() };
            let result = random_callias_family(seed, fibers, kmax, intervals)
                .and_then(|case| callias_check_fibered(&case.family, &case.targets, &case.alt_targets, &opts));
            with_time(callias_records(&name, result), start)
        }));
    }
    out
}

pub fn tail_tower(perturbation: Template) -> CoreResult<TruncationTower> {
    TruncationTower::from_templates(vec![4, 8, 12, 16], Template::Alternating { scale: 1.0 }, perturbation)
}

fn tower(ctx: &Ctx) -> Vec<Task> {
    let cases = [
        ("tower.decaying_rank", Template::DecayingRank { coeffs: vec![-2.5, -2.5], rate: 3.0 }),
        ("tower.zero", Template::Zero),
    ];
    cases
        .into_iter()
        .map(|(name, template)| {
            let inputs = ctx.inputs(name, json!({ "perturbation": format!("{template:?}"), "dims": [4, 8, 12, 16] }));
            single(inputs, name.into(), anchor::TOWER, move || {
                let r = tower_callias(&tail_tower(template)?, &TowerCalliasOptions::default())?;
                let last = *r.indices.last().expect("nonempty tower");
                Ok(Record::new(name, anchor::TOWER, r.indices.clone(), last, r.stabilized && r.tails_decay))
            })
        })
        .collect()
}

fn suite_record(name: String, anchor: &'static str, s: SuiteSummary) -> Record {
    let counted = s.trials - s.skipped;
    let mut rec = Record::new(name, anchor, s.passed, counted, s.all_passed());
    if s.trials > 0 && s.skipped == s.trials {
        rec.pass = Outcome::Skipped;
        rec.note = Some(format!("all {} trials failed a precondition", s.trials));
    } else if !s.failures.is_empty() {
        rec.note = Some(format!("failing trial seeds: {:?}", s.failures));
    }
    if s.worst_margin.is_finite() {
        rec.residual = Some(s.worst_margin);
    }
    rec
}

fn appendix(ctx: &Ctx) -> Vec<Task> {
    let a = ctx.cfg.appendix.clone();
    let mut out = Vec::new();
    let base = |tag: u64| ctx.seed(11, tag as usize);
    let trials = a.trials;

    let s = base(0);
    out.push(single(ctx.inputs("appendix.interpolation", json!({ "seed": s, "trials": trials })), "appendix.interpolation".into(), anchor::INTERPOLATION, move || {
        Ok(suite_record("appendix.interpolation".into(), anchor::INTERPOLATION, ap::interpolation_suite(s, trials)?))
    }));
    let s = base(1);
    out.push(single(ctx.inputs("appendix.conjugation", json!({ "seed": s, "trials": trials })), "appendix.conjugation".into(), anchor::CONJUGATION, move || {
        Ok(suite_record("appendix.conjugation".into(), anchor::CONJUGATION, ap::conjugation_suite(s, trials)?))
    }));
    for (j, &eps) in a.eps.iter().enumerate() {
        let s = base(10 + j as u64);
        let name = format!("appendix.transform_continuity[eps={eps}]");
        out.push(single(ctx.inputs(&name, json!({ "seed": s, "trials": trials, "eps": eps })), name.clone(), anchor::TRANSFORM, move || {
            Ok(suite_record(name, anchor::TRANSFORM, ap::transform_continuity_suite(s, trials, eps)?))
        }));
    }
    let s = base(2);
    let (st, se, sv) = (a.schedule_trials, a.schedule_eps.clone(), a.vectors);
    out.push(single(
        ctx.inputs("appendix.relative_bound", json!({ "seed": s, "trials": st, "eps": se, "vectors": sv })),
        "appendix.relative_bound".into(),
        anchor::SCHEDULE,
        move || Ok(suite_record("appendix.relative_bound".into(), anchor::SCHEDULE, ap::relative_bound_suite(s, st, &se, sv)?)),
    ));
    let (dims, se, s) = (a.tower_dims.clone(), a.schedule_eps.clone(), base(3));
    out.push(single(
        ctx.inputs("appendix.relative_bound_tower", json!({ "seed": s, "dims": dims, "eps": se, "vectors": sv })),
        "appendix.relative_bound_tower".into(),
        anchor::SCHEDULE_TOWER,
        move || {
            let tower = TruncationTower::from_templates(dims, Template::Linear, Template::BasisProjection { index: 2 })?;
            let r = ap::relative_bound_tower(&tower, &se, sv, 0.1, s)?;
            let shifts: Vec<i64> = r.schedules.last().map(|s| s.entries.iter().map(|e| e.n as i64).collect()).unwrap_or_default();
            let counts: Vec<i64> = r.counts.iter().map(|&c| c as i64).collect();
            Ok(Record::new("appendix.relative_bound_tower", anchor::SCHEDULE_TOWER, counts, shifts, r.holds))
        },
    ));
    for f in TailFunction::ALL {
        let name = format!("appendix.tail[{}]", f.name());
        let dims = a.tower_dims.clone();
        out.push(single(ctx.inputs(&name, json!({ "dims": dims })), name.clone(), anchor::TAILS, move || {
            let opts = TailOptions { structural_rank: 2, ..Default::default() };
            let r = ap::perturbation_tail_decay(&ap::default_tail_tower(dims)?, f, &opts)?;
            let top = *r.tail_norms.last().expect("nonempty tower");
            let mut rec = Record::new(name, anchor::TAILS, top, opts.tail_bound, r.holds);
            rec.residual = r.resolvent_residual;
            Ok(rec)
        }));
    }
    let dims = a.tower_dims.clone();
    out.push(single(ctx.inputs("appendix.projection_convergence", json!({ "dims": dims })), "appendix.projection_convergence".into(), anchor::COMPACT, move || {
        let k = Template::DecayingRank { coeffs: vec![1.0, -2.0, 0.5, 1.0], rate: 1.0 };
        let r = ap::projection_convergence(&dims, &k, &CompactnessOptions::default())?;
        let top = r.right_tails.last().copied().unwrap_or(0.0).max(r.left_tails.last().copied().unwrap_or(0.0));
        Ok(Record::new("appendix.projection_convergence", anchor::COMPACT, top, CompactnessOptions::default().threshold, r.holds))
    }));
    let s = base(4);
    out.push(single(ctx.inputs("appendix.resolvent_identity", json!({ "seed": s, "trials": 20 })), "appendix.resolvent_identity".into(), anchor::RESOLVENT, move || {
        let mut worst = 0.0f64;
        for j in 0..20 {
            let (t, r) = ap::relative_pair(sub_seed(s, j))?;
            worst = worst.max(ap::resolvent_identity_residual(&t, &r)?);
        }
        Ok(Record::new("appendix.resolvent_identity", anchor::RESOLVENT, worst, 1e-12, worst <= 1e-12).with_residual(worst))
    }));
    let s = base(5);
    out.push(single(ctx.inputs("appendix.quadrature", json!({ "seed": s, "trials": 5, "nodes": 128 })), "appendix.quadrature".into(), anchor::QUADRATURE, move || {
        let mut worst = 0.0f64;
        for j in 0..5 {
            let t = ap::random_hermitian(&RandomSpec::new(sub_seed(s, j), 8, (-5.0, 5.0), Structure::Dense))?;
            worst = worst.max(inv_sqrt_via_quadrature(&t, 128)?.error);
        }
        Ok(Record::new("appendix.quadrature", anchor::QUADRATURE, worst, 1e-8, worst <= 1e-8).with_residual(worst))
    }));
    let s = base(6);
    out.push(single(ctx.inputs("appendix.difference_integral", json!({ "seed": s, "nodes": 256 })), "appendix.difference_integral".into(), anchor::DIFFERENCE, move || {
        let (t, r) = ap::relative_pair(s)?;
        let rep = ap::difference_integral(&t.scaled(0.1), &r, 256)?;
        let bound = 1e-8 * rep.direct_norm.max(1.0);
        Ok(Record::new("appendix.difference_integral", anchor::DIFFERENCE, rep.residual, bound, rep.residual <= bound).with_residual(rep.residual))
    }));
    out
}
