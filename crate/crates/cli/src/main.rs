//! `reqc`: batch front-end for register statistics, distillation,
//! entanglement-rate and read-out simulations.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error. Errors are
//! also reported on stderr as one JSON object.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Runtime(_) => "runtime",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "reqc", version, about = "Rare-earth-ion quantum computing simulations")]
struct Cli {
    /// TOML run configuration; defaults are used for anything not given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Generate a crystal and write it to --out.
    GenCrystal,
    /// Monte Carlo register census against the analytic yield.
    Census,
    /// Analytic register yields.
    Stats,
    /// Channel distillation trials.
    Distill,
    /// Entanglement rate versus the excitation bound on random states.
    EntRate,
    /// The bound function and its maximum.
    FMax,
    /// Entanglement cost of a blockade CZ over a (g, Rabi) sweep.
    GateBound,
    /// Photon budget of the read-out ion.
    ReadoutBudget,
    /// Chain characterization runs against random ground truths.
    ReadoutInit,
    /// Stark shifts for the configured fields.
    Stark,
    /// Print the effective configuration as TOML.
    ShowConfig,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(p) = cli.parallel {
        cfg.parallelism = p;
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if cfg.trials == 0 {
        return Err(CliError::Config("trials must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let table = pool.install(|| match cli.command {
        Command::GenCrystal => commands::gen_crystal(&cfg, cfg.output.as_deref()),
        Command::Census => commands::census(&cfg),
        Command::Stats => commands::stats(&cfg),
        Command::Distill => commands::distill(&cfg),
        Command::EntRate => commands::ent_rate(&cfg),
        Command::FMax => commands::f_max_table(&cfg),
        Command::GateBound => commands::gate_bound(&cfg),
        Command::ReadoutBudget => commands::readout_budget(&cfg),
        Command::ReadoutInit => commands::readout_init(&cfg),
        Command::Stark => commands::stark(&cfg),
        Command::ShowConfig => {
            print!("{}", cfg.to_toml());
            Ok(output::Table::new("show-config", &[]))
        }
    })?;
    if matches!(cli.command, Command::ShowConfig) {
        return Ok(());
    }

    let text = table.render(cfg.format);
    match (&cfg.output, cli.command) {
        // the crystal file went to --out; the summary goes to stdout
        (_, Command::GenCrystal) | (None, _) => print!("{text}"),
        (Some(path), _) => std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(e.exit_code())
        }
    }
}
