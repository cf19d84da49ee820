//! rflab: scenario runner for the spectral flow laboratory.
//!
//! Usage:
//!   rflab <scenario> --config <path> [--out <dir>] [--threads n]
//!   rflab oracle disk --radius R --lambda-max L [--boundary M] [--out dir]
//!   rflab oracle rectangle --a A --b B --lambda-max L [--out dir]
//!
//! Exit codes: 0 all checks passed, 2 some check failed,
//! 3 infrastructure error. RFLAB_THREADS overrides --threads.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rflab::config::{ExperimentConfig, OracleSpec};
use rflab::scenario::{find, registry, RunContext, ScenarioReport};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rflab",
    version,
    about = "curvature-flow spectral laboratory",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a closed-form reference spectrum.
    Oracle(OracleCmd),
    /// Any registered scenario: rflab <scenario> --config <path>.
    #[command(external_subcommand)]
    Scenario(Vec<String>),
}

#[derive(Args)]
struct OracleCmd {
    #[command(subcommand)]
    kind: Option<OracleKind>,
    /// Config file (alternative to the inline forms).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write spectrum.json and a manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleKind {
    /// Dirichlet disk spectrum from Bessel zeros.
    Disk {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long = "lambda-max")]
        lambda_max: f64,
        /// Boundary sample count for the traces.
        #[arg(long, default_value_t = 96)]
        boundary: usize,
    },
    /// Rectangle spectrum by separation of variables.
    Rectangle {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long = "lambda-max")]
        lambda_max: f64,
    },
}

#[derive(Parser)]
#[command(name = "rflab <scenario>")]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(report) => {
            for c in &report.checks {
                println!(
                    "{} {} value={:.6e} threshold={:.6e} margin={:.3e} noise_floor={:.3e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold,
                    c.margin,
                    c.noise_floor
                );
            }
            if report.manifest.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "{}/{} checks passed",
                    report.manifest.checks_passed, report.manifest.checks_total
                );
                ExitCode::from(2)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn dispatch() -> Result<ScenarioReport> {
    let cli = Cli::parse();
    match cli.command {
        Command::Oracle(cmd) => run_oracle(cmd),
        Command::Scenario(argv) => run_scenario(argv),
    }
}

fn run_oracle(cmd: OracleCmd) -> Result<ScenarioReport> {
    let mut config = match (&cmd.kind, &cmd.config) {
        (Some(kind), None) => {
            let mut cfg = ExperimentConfig::default();
            cfg.oracle = Some(match *kind {
                OracleKind::Disk { radius, lambda_max, boundary } => {
                    OracleSpec::Disk { radius, lambda_max, boundary }
                }
                OracleKind::Rectangle { a, b, lambda_max } => {
                    OracleSpec::Rectangle { a, b, lambda_max }
                }
            });
            cfg
        }
        (None, Some(path)) => load_config(path)?,
        _ => bail!("oracle takes either an inline form (disk/rectangle) or --config, not both"),
    };
    config.scenario = "oracle".into();
    let ctx = RunContext {
        config,
        out_dir: cmd.out,
        threads: 1,
    };
    find("oracle").unwrap().run(&ctx)
}

fn run_scenario(argv: Vec<String>) -> Result<ScenarioReport> {
    let name = argv
        .first()
        .cloned()
        .ok_or_else(|| anyhow!("missing scenario name"))?;
    let scenario = find(&name).ok_or_else(|| {
        let names: Vec<&str> = registry().iter().map(|s| s.name()).collect();
        anyhow!("unknown scenario \"{name}\"; registered: {}", names.join(", "))
    })?;

    let args = RunArgs::try_parse_from(
        std::iter::once("rflab".to_string()).chain(argv.iter().skip(1).cloned()),
    )?;
    let mut config = load_config(&args.config)?;
    if config.scenario.is_empty() {
        config.scenario = name.clone();
    } else if config.scenario != name {
        bail!(
            "config names scenario \"{}\" but the command line asked for \"{name}\"",
            config.scenario
        );
    }

    let threads = std::env::var("RFLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(args.threads)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
        .max(1);

    let out_dir = args
        .out
        .unwrap_or_else(|| PathBuf::from(&config.out_dir).join(&name));

    let ctx = RunContext { config, out_dir: Some(out_dir), threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")?;
    pool.install(|| scenario.run(&ctx))
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    ExperimentConfig::from_json(&text)
}
