//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use indexlab_cli::checks::{collar_flatten_check, cutting_report, cylindrical_end_check, fredholm_refinement};
use indexlab_core::appendixprops::{self as ap, RandomSpec, Structure, TailFunction, TailOptions};
use indexlab_core::c64;
use indexlab_core::callias::{callias_check_fibered, interval_flow_identity, CalliasOptions};
use indexlab_core::dirac1d::{
    assemble, fredholm_constants, kernel_vectors, lambda_sweep, perturbations_invariance, profile_error, solve_index,
    BoundaryCondition, GridSpec, IndexOptions,
};
use indexlab_core::opcore::inv_sqrt_via_quadrature;
use indexlab_core::scenarios::{
    collar_compatible_pair, random_callias_family, random_index_path, random_invertible_hermitian, random_line_path,
    random_sf_path, rng, seeded_bump, sub_seed, unit_gap_path,
};
use indexlab_core::specflow::{linspace, PotentialPath};
use indexlab_core::surgery::cylinder_reduction;
use indexlab_core::{HermitianOperator, Tolerances};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn fast() -> IndexOptions {
    IndexOptions { refine: false, ..Default::default() }
}

fn four_way_identity() -> Outcome {
    let start = Instant::now();
    let mut ok = 0;
    let mut bad = Vec::new();
    for j in 0..500u64 {
        let k = 1 + (j % 8) as usize;
        let holds = random_sf_path(sub_seed(1, j), k, 64)
            .and_then(|p| interval_flow_identity(&p, None, &tol()))
            .map(|r| r.holds)
            .unwrap_or(false);
        if holds {
            ok += 1;
        } else {
            bad.push(j);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(ok == 500 && secs <= 60.0, format!("{ok}/500 paths agree in exact integers, {secs:.1} s (limit 60 s), failing {bad:?}"))
}

fn scalar(f: fn(f64) -> f64) -> PotentialPath {
    PotentialPath::diagonal(linspace(-8.0, 8.0, 161), vec![Arc::new(f)]).unwrap().with_compact_set(&[(-1.0, 1.0)]).unwrap()
}

fn closed_form_index() -> Outcome {
    let start = Instant::now();
    let grid = GridSpec::with_spacing(8.0, 0.05).unwrap();
    let opts = IndexOptions::default();
    let plus = solve_index(&scalar(f64::tanh), grid, 1.0, &opts).unwrap();
    let minus = solve_index(&scalar(|t| -t.tanh()), grid, 1.0, &opts).unwrap();
    let both = PotentialPath::diagonal(linspace(-8.0, 8.0, 161), vec![Arc::new(f64::tanh), Arc::new(|t: f64| -t.tanh())])
        .unwrap()
        .with_compact_set(&[(-1.0, 1.0)])
        .unwrap();
    let both = solve_index(&both, grid, 1.0, &opts).unwrap();
    let op = assemble(&scalar(f64::tanh), grid, BoundaryCondition::Aps, 1.0, &tol()).unwrap();
    let kv = kernel_vectors(&op, &tol()).unwrap();
    let vals: Vec<c64> = (0..kv[0].nrows()).map(|i| kv[0][(i, 0)]).collect();
    let err = profile_error(&vals, &grid.nodes(), |t| 1.0 / t.cosh());
    let secs = start.elapsed().as_secs_f64();
    let dims = |r: &indexlab_core::dirac1d::IndexReport| (r.index, r.dim_ker, r.dim_coker);
    let pass = dims(&plus) == (1, 1, 0) && dims(&minus) == (-1, 0, 1) && dims(&both) == (0, 1, 1) && err <= 1e-3 && secs <= 5.0;
    outcome(
        pass,
        format!(
            "tanh {:?}, -tanh {:?}, diag {:?} (index, ker, coker); sech profile error {err:.2e}; {secs:.2} s (limit 5 s)",
            dims(&plus),
            dims(&minus),
            dims(&both)
        ),
    )
}

fn lambda_and_bumps() -> Outcome {
    let (mut sweeps, mut bumps, mut bad) = (0, 0, Vec::new());
    for j in 0..20u64 {
        let k = 1 + (j % 4) as usize;
        let run = || -> indexlab_core::Result<(bool, usize)> {
            let path = random_index_path(sub_seed(3, j), k)?;
            let l0 = fredholm_constants(&path, &GridSpec::auto(&path, 0.2)?)?.lambda0;
            let grid = GridSpec::auto_coupled(&path, l0, 0.2)?;
            let sweep = lambda_sweep(&path, &[l0, 2.0 * l0, 5.0 * l0], grid, &IndexOptions::default())?;
            let bs = (0..5)
                .map(|b| seeded_bump(sub_seed(sub_seed(4, j), b), k, (-1.5, 1.5), path.grid().to_vec()))
                .collect::<indexlab_core::Result<Vec<_>>>()?;
            let (base, perturbed) = perturbations_invariance(&path, &bs, grid, l0, &fast())?;
            let same = perturbed.iter().filter(|&&p| p == base).count();
            Ok((sweep.constant && sweep.indices[0] == base, same))
        };
        match run() {
            Ok((s, b)) => {
                sweeps += s as usize;
                bumps += b;
                if !s || b < 5 {
                    bad.push(j);
                }
            }
            Err(_) => bad.push(j),
        }
    }
    outcome(sweeps == 20 && bumps == 100, format!("index constant over {{l0, 2 l0, 5 l0}} in {sweeps}/20 scenarios, unchanged by {bumps}/100 bumps, failing {bad:?}"))
}

fn fredholm_bound() -> Outcome {
    let (mut ok, mut shrink, mut worst_ratio) = (0, 0, f64::INFINITY);
    for j in 0..20u64 {
        let k = 1 + (j % 4) as usize;
        if let Ok((eps, mins, deficits, pass)) = random_index_path(sub_seed(5, j), k).and_then(|p| fredholm_refinement(&p, &tol())) {
            ok += pass as usize;
            shrink += (deficits[1] <= deficits[0]) as usize;
            worst_ratio = worst_ratio.min(mins[0].min(mins[1]) / eps);
        }
    }
    let c = fredholm_constants(&unit_gap_path(), &GridSpec::with_spacing(8.0, 0.05).unwrap()).unwrap();
    let unit = c.unit_coupling && c.lambda0 == 1.0 && (c.c_hat - 1.0).abs() < 1e-9 && (c.delta_hat - 0.4).abs() < 1e-3;
    outcome(
        ok == 20 && shrink == 20 && unit,
        format!(
            "{ok}/20 scenarios with min eig >= 0.8 eps (worst min eig / eps = {worst_ratio:.3}), deficit non-increasing under h/2 in {shrink}/20; unit-gap c = {:.4}, delta = {:.4}, lambda0 = {}",
            c.c_hat, c.delta_hat, c.lambda0
        ),
    )
}

fn relative_index_theorem() -> Outcome {
    let mut ok = 0;
    let mut bad = Vec::new();
    for j in 0..50u64 {
        let k = 1 + (j % 4) as usize;
        let holds = collar_compatible_pair(sub_seed(6, j), k)
            .and_then(|p| cutting_report(&p.first, &p.second, p.t_cut, p.collar, &fast()))
            .map(|r| r.holds)
            .unwrap_or(false);
        if holds {
            ok += 1;
        } else {
            bad.push(j);
        }
    }
    let p = collar_compatible_pair(sub_seed(6, 50), 2).unwrap();
    let degenerate = cutting_report(&p.first, &p.first, p.t_cut, p.collar, &fast()).map(|r| r.holds).unwrap_or(false);
    outcome(ok == 50 && degenerate, format!("{ok}/50 pairs with ind1 + ind2 = ind3 + ind4, M1 = M2 case holds: {degenerate}, failing {bad:?}"))
}

fn surgery_invariance() -> Outcome {
    let (mut ends, mut collars) = (0, 0);
    for j in 0..50u64 {
        let k = 1 + (j % 4) as usize;
        let path = random_index_path(sub_seed(7, j), k).unwrap();
        ends += cylindrical_end_check(&path, &fast()).map(|r| r.2).unwrap_or(false) as usize;
        let target = random_invertible_hermitian(&mut rng(sub_seed(8, j)), k, 0.5, 2.0);
        collars += collar_flatten_check(&path, &target, &fast()).map(|r| r.2).unwrap_or(false) as usize;
    }
    let mut reductions = 0;
    for j in 0..3u64 {
        let path = random_line_path(sub_seed(9, j), 3, &[(-3.0, -1.0), (1.0, 3.0)], 12.0, 121, 0.5).unwrap();
        let target = HermitianOperator::from_real_diagonal(&[1.0, -1.0, 1.5]);
        let (lambda, grid) = indexlab_cli::checks::common_coupling(&[&path], 3.0, 0.2).unwrap();
        reductions += cylinder_reduction(&path, &target, 0.2, lambda, grid, &fast()).map(|r| r.holds).unwrap_or(false) as usize;
    }
    outcome(
        ends == 50 && collars == 50 && reductions == 3,
        format!("cylindrical end {ends}/50, collar flattening {collars}/50, reduction to half-cylinders {reductions}/3"),
    )
}

fn callias_theorem() -> Outcome {
    let start = Instant::now();
    let (mut ok, mut fibered, mut multi) = (0, 0, 0);
    let mut bad = Vec::new();
    for j in 0..200u64 {
        let fibers = 1 + (j % 4) as usize;
        let intervals = 1 + ((j / 4) % 3) as usize;
        let k_max = if j % 5 == 0 { 1 } else { 2 + (j % 7) as usize };
        let opts = CalliasOptions { total: fibers > 1 && k_max <= 3, ..Default::default() };
        let pass = random_callias_family(sub_seed(10, j), fibers, k_max, intervals)
            .and_then(|c| callias_check_fibered(&c.family, &c.targets, &c.alt_targets, &opts))
            .map(|r| r.pass && r.rhs == r.rhs_alt)
            .unwrap_or(false);
        if pass {
            ok += 1;
            fibered += (fibers > 1) as usize;
            multi += (intervals > 1) as usize;
        } else {
            bad.push(j);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ok == 200,
        format!("{ok}/200 cases with index = pairing for a random target and for -1 ({fibered} fibered, {multi} multi-interval), {secs:.1} s, failing {bad:?}"),
    )
}

fn appendix_suites() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut suite = |s: ap::SuiteSummary| {
        pass &= s.all_passed() && s.skipped == 0;
        lines.push(format!("{} {}/{}", s.name, s.passed, s.trials));
    };
    suite(ap::interpolation_suite(101, 1000).unwrap());
    suite(ap::conjugation_suite(102, 1000).unwrap());
    for (j, eps) in [0.01, 0.1, 0.4].into_iter().enumerate() {
        suite(ap::transform_continuity_suite(103 + j as u64, 1000, eps).unwrap());
    }
    suite(ap::relative_bound_suite(106, 100, &[0.5, 0.1, 0.01], 100).unwrap());
    let tower = ap::default_tail_tower(vec![16, 32, 64]).unwrap();
    let opts = TailOptions { structural_rank: 2, ..Default::default() };
    let mut residual = 0.0f64;
    for f in TailFunction::ALL {
        let r = ap::perturbation_tail_decay(&tower, f, &opts).unwrap();
        pass &= r.holds && r.decays;
        residual = residual.max(r.resolvent_residual.unwrap_or(0.0));
        lines.push(format!("tail {} {:.1e}", f.name(), r.tail_norms.last().unwrap()));
    }
    for j in 0..20 {
        let (t, r) = ap::relative_pair(sub_seed(107, j)).unwrap();
        residual = residual.max(ap::resolvent_identity_residual(&t, &r).unwrap());
    }
    pass &= residual <= 1e-12;
    let mut quad = 0.0f64;
    for j in 0..10 {
        let t = ap::random_hermitian(&RandomSpec::new(sub_seed(108, j), 16, (-5.0, 5.0), Structure::Dense)).unwrap();
        quad = quad.max(inv_sqrt_via_quadrature(&t, 128).unwrap().error);
    }
    pass &= quad <= 1e-8;
    lines.push(format!("resolvent identity {residual:.1e}, quadrature {quad:.1e}"));
    outcome(pass, lines.join("; "))
}

fn run_cli(config: &Path, out: &Path) -> (i32, Vec<u8>, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_indexlab"))
        .args(["run", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .status()
        .expect("run indexlab");
    let read = |f: &str| std::fs::read(out.join(f)).unwrap_or_default();
    (status.code().unwrap_or(-1), read("report.csv"), read("report.json"))
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("all.json");
    std::fs::write(&config, r#"{"scenario": "all"}"#).unwrap();
    let (c1, csv1, json1) = run_cli(&config, &dir.path().join("first"));
    let (c2, csv2, json2) = run_cli(&config, &dir.path().join("second"));
    let rows = csv1.iter().filter(|&&b| b == b'\n').count().saturating_sub(1);
    let same = !csv1.is_empty() && csv1 == csv2 && json1 == json2;
    outcome(
        same && c1 == 0 && c2 == 0,
        format!("two runs of the full suite ({rows} checks): byte-identical CSV and JSON {same}, exit codes {c1} and {c2}, {:.1} s", start.elapsed().as_secs_f64()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("four-way spectral flow identity", four_way_identity),
        ("closed-form 1-D index", closed_form_index),
        ("coupling and perturbation invariance", lambda_and_bumps),
        ("Fredholm lower bound", fredholm_bound),
        ("relative index theorem", relative_index_theorem),
        ("surgery invariance", surgery_invariance),
        ("index = boundary pairing", callias_theorem),
        ("operator inequality and tail suites", appendix_suites),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += !o.pass as usize;
        println!("criterion {} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/9 criteria pass", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
