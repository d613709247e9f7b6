use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dcsk_cli::commands::{self, Input, Overrides, Report};
use dcsk_cli::config::{parse_grid, ExperimentConfig};
use dcsk_cli::{output, WORKERS_ENV};
use dcsk_core::montecarlo::Simulator;
use dcsk_core::SchemeId;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status when every point finished but at least one ran out of bits.
const EXIT_FLAGGED: u8 = 3;

/// Simulate and analyse network-coded DCSK two-way relay networks.
#[derive(Parser)]
#[command(name = "dcsk-nc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo BER sweep of one scenario.
    Simulate(Common),
    /// Closed-form BER, throughput and spectral efficiency.
    Analyze(Common),
    /// Simulated and analytical metrics of several scenarios in long format.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (repeatable for `compare`).
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    /// Output CSV; defaults to the config's `output` key, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Eb/N0 grid in dB as `start:stop:step`.
    #[arg(long)]
    grid: Option<String>,
    /// Scheme(s) to run instead of the configured one, comma separated.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<SchemeId>,
}

fn simulator() -> Result<Simulator> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{WORKERS_ENV}={v} is not a thread count"))?;
            Ok(Simulator::with_workers(n)?)
        }
        Err(std::env::VarError::NotPresent) => {
            let n = std::thread::available_parallelism().map_or(1, |n| n.get());
            Ok(Simulator::with_workers(n)?)
        }
        Err(e) => bail!("{WORKERS_ENV}: {e}"),
    }
}

fn load(paths: &[PathBuf]) -> Result<Vec<Input>> {
    paths
        .iter()
        .map(|p| {
            let config = ExperimentConfig::load(p)
                .with_context(|| format!("invalid config {}", p.display()))?;
            Ok(Input {
                path: p.display().to_string(),
                config,
            })
        })
        .collect()
}

fn single(inputs: &[Input], command: &str) -> Result<Input> {
    match inputs {
        [one] => Ok(one.clone()),
        _ => bail!("{command} takes exactly one --config"),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (name, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Analyze(c) => ("analyze", c),
        Command::Compare(c) => ("compare", c),
    };
    let inputs = load(&common.configs)?;
    let overrides = Overrides {
        seed: common.seed,
        grid: common
            .grid
            .as_deref()
            .map(parse_grid)
            .transpose()
            .map_err(|e| anyhow::anyhow!("--grid: {e}"))?,
        schemes: common.scheme.clone(),
    };
    let report: Report = match cli.command {
        Command::Simulate(_) => {
            commands::simulate(&single(&inputs, name)?, &simulator()?, &overrides)?
        }
        Command::Analyze(_) => commands::analyze(&single(&inputs, name)?, &overrides)?,
        Command::Compare(_) => commands::compare(&inputs, &simulator()?, &overrides)?,
    };
    let out = common.out.clone().or_else(|| match inputs.as_slice() {
        [one] => one.config.output.clone(),
        _ => None,
    });
    output::write_output(out.as_deref(), &report.csv)?;
    if report.flagged {
        eprintln!("warning: some points reached max_bits before min_errors");
    }
    Ok(report.flagged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(EXIT_FLAGGED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
