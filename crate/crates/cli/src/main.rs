//! Configuration-driven experiment runner. Each mode reads a JSON config,
//! runs its experiment deterministically from the seed, writes results.csv,
//! results.json and summary.json, and exits nonzero if any check fails.

mod config;
mod output;
mod runners;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Mode};

#[derive(Parser)]
#[command(
    name = "cauchyborn",
    about = "Detection experiments on lattice Cauchy surfaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    mode: ModeCommand,
}

#[derive(Subcommand)]
enum ModeCommand {
    /// Triangular approximation of a surface: distance bounds per level.
    GeometryApprox(RunArgs),
    /// Boosted band containment of a raised surface.
    BoostBand(RunArgs),
    /// Propagation- and interaction-locality checks on a circuit.
    AxiomCheck(RunArgs),
    /// Sequential / parallel / Born detection distributions on one plan.
    Detect(RunArgs),
    /// Squeeze-bound convergence along a rising cut sequence.
    Converge(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `out_dir`, default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override for residual checks.
    #[arg(long)]
    tol: Option<f64>,
}

impl ModeCommand {
    fn mode(&self) -> Mode {
        match self {
            ModeCommand::GeometryApprox(_) => Mode::GeometryApprox,
            ModeCommand::BoostBand(_) => Mode::BoostBand,
            ModeCommand::AxiomCheck(_) => Mode::AxiomCheck,
            ModeCommand::Detect(_) => Mode::Detect,
            ModeCommand::Converge(_) => Mode::Converge,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            ModeCommand::GeometryApprox(a)
            | ModeCommand::BoostBand(a)
            | ModeCommand::AxiomCheck(a)
            | ModeCommand::Detect(a)
            | ModeCommand::Converge(a) => a,
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let args = cli.mode.args();
    let config = ExperimentConfig::load(&args.config)?;
    let mode = cli.mode.mode();
    if config.mode != mode {
        bail!(
            "config declares mode `{}` but the `{}` subcommand was invoked",
            config.mode.name(),
            mode.name()
        );
    }
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let tol = args.tol.or(config.tolerance).unwrap_or(match mode {
        Mode::BoostBand => 1e-9,
        _ => 1e-10,
    });
    let artifacts = match mode {
        Mode::GeometryApprox => runners::run_geometry_approx(&config, seed, tol)?,
        Mode::BoostBand => runners::run_boost_band(&config, seed, tol)?,
        Mode::AxiomCheck => runners::run_axiom_check(&config, seed, tol)?,
        Mode::Detect => runners::run_detect(&config, seed, tol)?,
        Mode::Converge => runners::run_converge(&config, seed, tol)?,
    };
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out_dir.as_ref().map(|d| config.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    output::write_artifacts(&out_dir, mode.name(), seed, &artifacts)?;
    for check in &artifacts.checks {
        let tag = if check.pass { "pass" } else { "FAIL" };
        println!("[{tag}] {} (residual {})", check.name, check.residual);
    }
    println!(
        "{}: {} checks, results in {}",
        mode.name(),
        artifacts.checks.len(),
        out_dir.display()
    );
    Ok(artifacts.all_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{{\"error\": \"one or more checks failed; see summary.json\"}}");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("{{\"error\": {:?}}}", format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}
