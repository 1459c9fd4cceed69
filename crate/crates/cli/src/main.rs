mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{Experiment, RunConfig};
use report::{Outcome, Sink, Status};

#[derive(Parser)]
#[command(name = "maxgraph", version, about = "Maximal spacelike graphs in M² × ℝ₁: solver and verification runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Dirichlet problem over the configured ladder.
    Solve(RunArgs),
    /// Solve, then check the geometric identities and inequalities.
    Verify(RunArgs),
    /// Capacity exhaustion and random-walk probes.
    Parab(RunArgs),
    /// Wedge containment, distance and properness checks.
    Wedge(RunArgs),
    /// Flatness of maximal graphs over growing discs.
    Rigidity(RunArgs),
    /// Every experiment the configuration has a section for.
    Suite(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_FAILED_CHECKS: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Solve(a) => (Experiment::Solve, a),
        Command::Verify(a) => (Experiment::VerifyIdentities, a),
        Command::Parab(a) => (Experiment::Parabolicity, a),
        Command::Wedge(a) => (Experiment::Wedge, a),
        Command::Rigidity(a) => (Experiment::Rigidity, a),
        Command::Suite(a) => (Experiment::FullSuite, a),
    };
    let mut config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(declared) = config.experiment {
        if declared != experiment {
            eprintln!(
                "error: {}: configuration declares experiment `{declared}` but `{experiment}` was requested",
                args.config.display()
            );
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    config.experiment = Some(experiment);
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.output {
        config.output = out;
    }
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match run(experiment, &config) {
        Ok(outcome) => {
            let failed = outcome.checks.iter().filter(|c| c.status == Status::Fail).count();
            let mut stdout = std::io::stdout().lock();
            let _ = report::write_ledger_lines(&mut stdout, &outcome.checks);
            println!(
                "{experiment}: {} checks, {failed} failed; artifacts in {}",
                outcome.checks.len(),
                config.output.display()
            );
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED_CHECKS)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}

fn run(experiment: Experiment, config: &RunConfig) -> Result<Outcome> {
    let model = config.model.build()?;
    let mut sink = Sink::new(&config.output, config)?;
    sink.config_toml(config)?;
    let mut out = Outcome::default();
    match experiment {
        Experiment::Solve => {
            experiments::solve(config, &model, &mut sink, &mut out)?;
        }
        Experiment::VerifyIdentities => {
            let levels = experiments::solve(config, &model, &mut sink, &mut out)?;
            experiments::verify(config, &model, &levels, &mut sink, &mut out)?;
        }
        Experiment::Parabolicity => experiments::parabolicity(config, &model, &mut sink, &mut out)?,
        Experiment::Wedge => experiments::wedge(config, &model, &mut sink, &mut out)?,
        Experiment::Rigidity => experiments::rigidity(config, &model, &mut sink, &mut out)?,
        Experiment::FullSuite => experiments::full_suite(config, &model, &mut sink, &mut out)?,
    }
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    report::write_summary(&mut sink, experiment.name(), config, &out, timestamp)?;
    Ok(out)
}
