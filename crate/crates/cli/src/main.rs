//! `ipm`: runs the property suites and exposes a few single-shot operations.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use ipm_core::harness::generate::{generate_space, SpaceGen};
use ipm_core::harness::report::Report;
use ipm_core::harness::{self, emit_report, Scenario, Suite, EXIT_CONFIG, EXIT_FAIL, EXIT_PASS};
use ipm_core::homotopy::{track, uniform_grid, HomotopyKind};
use ipm_core::wire::{parse_space, MeasureDoc, TestFunctionDoc, TrackDoc};
use ipm_core::{classify, neighborhood_retract, retract_to_dirac, Error, FiniteMetricSpace, RetractVariant};
use ipm_core::{IdempotentMeasure, Normalize, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "ipm", version, about = "Idempotent measure property harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a property suite, or replay counterexamples.
    Run(RunArgs),
    /// Evaluate a measure on a test function.
    Eval {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        /// Generator spec or space file, for measures without an embedded space.
        #[arg(long)]
        space: Option<String>,
    },
    /// Retract a measure of I_f onto its Dirac, or a neighborhood measure into I_f.
    Retract {
        #[arg(long)]
        measure: PathBuf,
        /// Apply the neighborhood retraction with this variant.
        #[arg(long)]
        variant: Option<RetractVariant>,
        #[arg(long)]
        space: Option<String>,
    },
    /// Sample a homotopy on a uniform grid.
    Track {
        #[arg(long, value_enum)]
        kind: TrackKind,
        #[arg(long)]
        measure: PathBuf,
        /// Fibre base point; defaults to the top atom.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        space: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TrackKind {
    Deformation,
    Fibre,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, required_unless_present = "replay")]
    suite: Option<String>,
    /// `grid_1d:N`, `circle:N`, `random_points:D:N:SEED`, or a space file.
    #[arg(long, default_value = "grid_1d:64")]
    space: String,
    /// Defaults to the suite's own count.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = harness::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = harness::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Restrict suites that compare both variants to one.
    #[arg(long)]
    variant: Option<RetractVariant>,
    /// Report, counterexample or payload to rerun; other scenario flags are ignored.
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long)]
    parallel: bool,
    /// Record wall time in the report (breaks byte-for-byte reproducibility).
    #[arg(long)]
    timing: bool,
    /// Report path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_space(arg: &str) -> Result<(String, Arc<FiniteMetricSpace>)> {
    if let Ok(spec) = arg.parse::<SpaceGen>() {
        return Ok((spec.to_string(), Arc::new(generate_space(&spec)?)));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::Config(format!(
            "{arg:?} is neither a space generator nor a file"
        )));
    }
    let label = path
        .file_name()
        .map_or(arg.into(), |n| n.to_string_lossy().into_owned());
    Ok((label, Arc::new(parse_space(&read(path)?)?)))
}

fn load_measure(path: &Path, space: Option<&str>) -> Result<IdempotentMeasure> {
    let doc: MeasureDoc = serde_json::from_str(&read(path)?)?;
    let space = match (&doc.space, space) {
        (None, Some(s)) => Some(load_space(s)?.1),
        _ => None,
    };
    doc.to_measure(space.as_ref(), Normalize::Reject)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<Report> {
    let start = Instant::now();
    let mut report = match &args.replay {
        Some(path) => harness::replay(&read(path)?)?,
        None => {
            let suite: Suite = args.suite.as_deref().unwrap_or_default().parse()?;
            let (label, space) = load_space(&args.space)?;
            let mut s = Scenario::with_space(suite, label, space);
            s.trials = args.trials.unwrap_or(s.trials);
            s.seed = args.seed;
            s.tolerance = args.tolerance;
            s.variant = args.variant;
            s.parallel = args.parallel;
            harness::run_suite(&s)?
        }
    };
    if args.timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    match &args.out {
        Some(p) => emit_report(&report, p)?,
        None => print!("{}", report.to_json()),
    }
    Ok(report)
}

fn pretty(v: serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => {
            let report = run(&args)?;
            let failed = report.failed_checks();
            if failed.is_empty() {
                eprintln!("{}: pass ({} checks)", report.config.suite, report.checks.len());
                Ok(EXIT_PASS)
            } else {
                eprintln!("{}: FAIL {}", report.config.suite, failed.join(", "));
                Ok(EXIT_FAIL)
            }
        }
        Command::Eval { measure, phi, space } => {
            let mu = load_measure(&measure, space.as_deref())?;
            let doc: TestFunctionDoc = serde_json::from_str(&read(&phi)?)?;
            let phi = doc.to_function(mu.space())?;
            println!("{}", mu.evaluate(&phi)?);
            Ok(EXIT_PASS)
        }
        Command::Retract {
            measure,
            variant,
            space,
        } => {
            let mu = load_measure(&measure, space.as_deref())?;
            let c = classify(&mu);
            let image = match variant {
                Some(v) => neighborhood_retract(&mu, v)?,
                None => retract_to_dirac(&mu)?,
            };
            let out = json!({
                "in_if": c.in_if,
                "top": c.top.map(|p| mu.space().id(p).to_string()),
                "retract": MeasureDoc::from_measure(&image, false),
            });
            print!("{}", pretty(out)?);
            Ok(EXIT_PASS)
        }
        Command::Track {
            kind,
            measure,
            point,
            grid,
            out,
            space,
        } => {
            let mu = load_measure(&measure, space.as_deref())?;
            let kind = match kind {
                TrackKind::Deformation => HomotopyKind::Deformation,
                TrackKind::Fibre => {
                    let x = match point {
                        Some(id) => mu.space().point(&id)?,
                        None => classify(&mu)
                            .top
                            .ok_or_else(|| Error::Config("measure has no unique top atom; pass --point".into()))?,
                    };
                    HomotopyKind::Fibre(x)
                }
            };
            let tr = track(kind, &mu, &uniform_grid(grid)?)?;
            write_or_print(
                out.as_deref(),
                &pretty(serde_json::to_value(TrackDoc::from_track(&tr, true))?)?,
            )?;
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
