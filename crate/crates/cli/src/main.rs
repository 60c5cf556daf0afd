use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use daisychain_core::experiment::{emit_csv, parse_strategies, write_csv};
use daisychain_core::{
    run_experiment, selftest, CorrelationModel, ExperimentSpec, NetworkConfig, RunOptions, SweepAxis,
};

/// Monte-Carlo sum-SE sweeps for cell-free uplinks on a daisy-chain fronthaul.
#[derive(Debug, Parser)]
#[command(name = "daisychain", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Flat key-value network config; unset keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; trial `t` uses stream `t` of this seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma list of path-allocation-compression triples, e.g. `sp-ef-wsinm,tp-lf-scnm`.
    #[arg(long, global = true)]
    strategies: Option<String>,
    /// Sweep axis when no subcommand is given.
    #[arg(long, global = true)]
    sweep: Option<Axis>,
    /// Comma list of user counts or total rates.
    #[arg(long, global = true)]
    values: Option<String>,
    /// Propagation of the pre-compression correlation along the chain.
    #[arg(long, global = true, default_value = "compression-only")]
    correlation: CorrelationModel,
    /// Also run every chain on realized signals and verify the estimate
    /// against its combiner expansion.
    #[arg(long, global = true)]
    check_reconstruction: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sum SE versus the number of users at the configured total rate.
    SweepUsers,
    /// Sum SE versus the total fronthaul rate at the configured user count.
    SweepRate,
    /// Runs the built-in oracle and invariant checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    Users,
    Rate,
}

const USER_STRATEGIES: &str = "sp-ef-infinite,tp-lf-wsinm,tp-ef-wsinm,sp-lf-wsinm,sp-ef-wsinm";
const RATE_STRATEGIES: &str = "sp-ef-infinite,\
    sp-ef-eiu,sp-ef-scnm,sp-ef-wsinm,sp-lf-eiu,sp-lf-scnm,sp-lf-wsinm,\
    tp-ef-eiu,tp-ef-scnm,tp-ef-wsinm,tp-lf-eiu,tp-lf-scnm,tp-lf-wsinm";

fn parse_list<T: std::str::FromStr>(list: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("bad value '{s}': {e}")))
        .collect()
}

fn axis(cli: &Cli) -> anyhow::Result<Axis> {
    let from_command = match cli.command {
        Some(Command::SweepUsers) => Some(Axis::Users),
        Some(Command::SweepRate) => Some(Axis::Rate),
        _ => None,
    };
    match (from_command, cli.sweep) {
        (Some(a), Some(b)) if a != b => {
            let name = b.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            bail!("--sweep {name} contradicts the subcommand")
        }
        (Some(a), _) | (None, Some(a)) => Ok(a),
        (None, None) => bail!("choose a subcommand (sweep-users, sweep-rate, selftest) or pass --sweep"),
    }
}

fn base_config(cli: &Cli) -> anyhow::Result<NetworkConfig> {
    let mut cfg = match &cli.config {
        Some(path) => NetworkConfig::from_file(path).with_context(|| format!("loading {}", path.display()))?,
        None => NetworkConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_sweep(cli: &Cli, axis: Axis) -> anyhow::Result<()> {
    let base = base_config(cli)?;
    let sweep = match axis {
        Axis::Users => SweepAxis::Users(match &cli.values {
            Some(v) => parse_list(v)?,
            None => (1..=10).map(|i| 2 * i).collect(),
        }),
        Axis::Rate => SweepAxis::Rate(match &cli.values {
            Some(v) => parse_list(v)?,
            None => (1..=10).map(|i| 100.0 * i as f64).collect(),
        }),
    };
    let default_strategies = match axis {
        Axis::Users => USER_STRATEGIES,
        Axis::Rate => RATE_STRATEGIES,
    };
    let strategies = parse_strategies(cli.strategies.as_deref().unwrap_or(default_strategies))?;
    let options = RunOptions { correlation: cli.correlation, check_reconstruction: cli.check_reconstruction };
    let spec = ExperimentSpec { base, sweep, strategies, options };
    let rows = run_experiment(&spec)?;
    match &cli.out {
        Some(path) => emit_csv(&rows, path).with_context(|| format!("writing {}", path.display()))?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn run_selftest(cli: &Cli) -> anyhow::Result<bool> {
    let checks = selftest::run(cli.seed.unwrap_or(1));
    let mut out = std::io::stdout().lock();
    for check in &checks {
        let verdict = if check.passed { "ok" } else { "FAILED" };
        writeln!(out, "{verdict:>6}  {:<30} {}", check.name, check.detail)?;
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Selftest) => run_selftest(&cli),
        _ => axis(&cli).and_then(|a| run_sweep(&cli, a)).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("daisychain: selftest failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("daisychain: {e:#}");
            ExitCode::FAILURE
        }
    }
}
