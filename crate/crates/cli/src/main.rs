//! `oupinball`: runs bound catalogues, spectral estimates, simulations and cross-checks
//! from a JSON configuration and writes CSV/JSON artifacts.

mod commands;
mod config;
mod crosscheck;
mod error;
mod output;

use clap::Parser;
use config::{Command, ExperimentConfig, SCHEMA};
use error::CliError;
use output::{write_meta, Meta};
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Debug, Parser)]
#[command(
    name = "oupinball",
    version,
    about = "Poincare-constant experiments for the Gaussian measure outside obstacles"
)]
struct Cli {
    #[arg(value_enum, required_unless_present = "print_schema")]
    command: Option<Command>,
    /// Experiment configuration (JSON).
    #[arg(long, required_unless_present = "print_schema")]
    config: Option<PathBuf>,
    /// Output directory [default: the config's `out`, else "out"].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for path-parallel simulation and sweeps.
    #[arg(long)]
    threads: Option<usize>,
    /// Print the configuration schema and exit.
    #[arg(long)]
    print_schema: bool,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.print_schema {
        print!("{SCHEMA}");
        return Ok(());
    }
    let (Some(cmd), Some(path)) = (cli.command, cli.config.as_ref()) else {
        return Err(CliError::Config("a command and --config are required".into()));
    };
    let started = Instant::now();
    let mut cfg = load(path)?;
    if let Some(c) = cfg.command.filter(|&c| c != cmd) {
        return Err(CliError::Config(format!(
            "config is for `{}` but `{}` was requested",
            c.name(),
            cmd.name()
        )));
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let sweep_mc = cmd == Command::Sweep && cfg.sweep.as_ref().is_some_and(|s| s.simulate.is_some());
    if (cmd.needs_seed() || sweep_mc) && cfg.seed.is_none() {
        return Err(CliError::Config("a seed is mandatory for Monte Carlo commands".into()));
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let artifacts = commands::run(cmd, &cfg)?;
    let dir = cli.out.or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    artifacts.write(&dir)?;
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    write_meta(
        &dir,
        &Meta {
            command: cmd.name(),
            version: env!("CARGO_PKG_VERSION"),
            config: path.display().to_string(),
            seed: cfg.seed,
            threads: rayon::current_num_threads(),
            created_unix_seconds: created,
            elapsed_seconds: started.elapsed().as_secs_f64(),
            files: artifacts.names(),
        },
    )?;
    for name in artifacts.names() {
        println!("{}", dir.join(name).display());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
