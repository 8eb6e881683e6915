//! Executes tasks in a thread pool and assembles the report in declaration order.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::checks::{self, Context, TaskOutput};
use crate::config::ScenarioConfig;
use crate::potential::{self, hex, InputError};
use crate::report::RunReport;

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
    /// Keep per-check wall times. Off by default so reports are byte-stable.
    pub timings: bool,
}

/// Runs the configured scenario. `base` resolves relative potential file paths.
///
/// Fails only on unusable input; check failures are recorded in the report.
pub fn run(cfg: &ScenarioConfig, base: Option<&Path>, opts: &RunOptions) -> Result<RunReport, InputError> {
    let potential = potential::load(cfg, base)?;
    let ctx = Arc::new(Context { cfg: cfg.clone(), potential, tol: cfg.tolerances() });
    let tasks = checks::tasks(&ctx, cfg.scenario);
    let digests: Vec<String> = tasks.iter().map(|t| hex(&Sha256::digest(t.inputs.to_string().as_bytes()))).collect();
    let jobs: Vec<_> = tasks.into_iter().map(|t| t.job).collect();
    let execute = || jobs.into_par_iter().map(|job| job()).collect::<Vec<TaskOutput>>();
    let outputs = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| InputError(format!("cannot start {n} worker threads: {e}")))?
            .install(execute),
        None => execute(),
    };
    let mut report = RunReport::default();
    for (out, digest) in outputs.into_iter().zip(digests) {
        for mut rec in out.records {
            rec.inputs_digest = digest.clone();
            if !opts.timings {
                rec.seconds = None;
            }
            report.records.push(rec);
        }
        if report.branches.is_none() {
            report.branches = out.branches;
        }
    }
    Ok(report)
}
