use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use indexlab_cli::config::{Format, ScenarioKind};
use indexlab_cli::emit::emit;
use indexlab_cli::{parse_config, run, Outcome, RunOptions};

/// Environment variable that overrides the configured output directory.
const OUT_DIR_ENV: &str = "INDEXLAB_OUT_DIR";

#[derive(Parser)]
#[command(name = "indexlab", version, about = "Numerical checks of index, spectral flow and relative index identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a scenario config and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides INDEXLAB_OUT_DIR and the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated list of csv, json, gnuplot.
        #[arg(long, value_delimiter = ',', value_parser = parse_format)]
        format: Option<Vec<Format>>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Record per-check wall times (makes reports run-dependent).
        #[arg(long)]
        timings: bool,
    },
    /// List scenario kinds.
    ListScenarios,
    /// Describe the checks of a scenario.
    Describe { scenario: String },
}

fn parse_format(s: &str) -> Result<Format, String> {
    Format::parse(s).ok_or_else(|| format!("unknown format {s:?}; expected csv, json or gnuplot"))
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListScenarios => {
            for k in ScenarioKind::ALL {
                println!("{}", k.name());
            }
            ExitCode::SUCCESS
        }
        Command::Describe { scenario } => match ScenarioKind::parse(&scenario) {
            Some(k) => {
                println!("{}: {}", k.name(), k.description());
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("unknown scenario {scenario:?}; see `indexlab list-scenarios`");
                ExitCode::from(2)
            }
        },
        Command::Run { config, out, format, seed, jobs, timings } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let mut cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .or_else(|| cfg.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("indexlab-out"));
            let formats = format
                .or_else(|| cfg.output.formats.clone())
                .unwrap_or_else(|| vec![Format::Csv, Format::Json, Format::Gnuplot]);
            let base = config.parent().map(|p| p.to_path_buf());
            let report = match run(&cfg, base.as_deref(), &RunOptions { jobs, timings }) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("invalid input: {e}");
                    return ExitCode::from(2);
                }
            };
            for r in &report.records {
                match r.pass {
                    Outcome::Pass => {}
                    Outcome::Skipped => eprintln!("skipped {}: {}", r.check_name, r.note.as_deref().unwrap_or("")),
                    Outcome::Fail | Outcome::Error => eprintln!(
                        "{} {}: lhs {} rhs {} [{}] {}",
                        r.pass.name().to_uppercase(),
                        r.check_name,
                        r.lhs,
                        r.rhs,
                        r.paper_anchor,
                        r.note.as_deref().unwrap_or("")
                    ),
                }
            }
            if let Err(e) = emit(&report, &formats, &dir) {
                eprintln!("cannot write report to {}: {e}", dir.display());
                return ExitCode::from(2);
            }
            eprintln!(
                "{} checks: {} passed, {} failed, {} skipped, {} errors; report in {}",
                report.records.len(),
                report.count(Outcome::Pass),
                report.count(Outcome::Fail),
                report.count(Outcome::Skipped),
                report.count(Outcome::Error),
                dir.display()
            );
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
