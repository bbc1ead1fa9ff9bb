//! `hqs`: protocol simulation, error-budget sweeps, physics bounds and
//! measurement statistics for a qubit-coupled bulk acoustic resonator.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hqs_core::bounds::ScenarioLabel;
use serde::Serialize;

use crate::config::StatsMode;

#[derive(Debug)]
pub enum CliError {
    /// Bad input or configuration; exit status 2.
    User(String),
    /// Numerical or convergence failure; exit status 3.
    Numerical(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::User(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<hqs_core::Error> for CliError {
    fn from(e: hqs_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::User(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "hqs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug, Clone)]
struct GlobalArgs {
    /// Config file: a path, a name under $HQS_CONFIG_DIR, or a bundled name.
    #[arg(long, global = true, default_value = "table1.json")]
    config: String,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and inversion curves.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for synthetic data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Re-derive the config hash and re-run to check the output bytes.
    #[arg(long, global = true)]
    verify: bool,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Run the measurement protocol once.
    Simulate {
        /// True phonon population; overrides `simulate.true_population`.
        #[arg(long)]
        population: Option<f64>,
    },
    /// Error-budget sweep from the `sweep` block; CSV output.
    Sweep,
    /// Bound from a measured population.
    Bound {
        #[arg(long, value_enum)]
        channel: Channel,
        #[arg(long)]
        population: Option<f64>,
        /// Piezoelectric coefficient for the dp channel, C/m².
        #[arg(long)]
        e33: Option<f64>,
    },
    /// Bounds for a device scenario.
    Project {
        /// Built-in scenario; otherwise the config's `scenario` block.
        #[arg(long, value_parser = parse_scenario)]
        scenario: Option<ScenarioLabel>,
        /// Restrict to one channel.
        #[arg(long, value_enum)]
        channel: Option<Channel>,
        #[arg(long)]
        population: Option<f64>,
    },
    /// Weighted means, block statistics or thermometry fits.
    Stats {
        #[arg(long, value_enum)]
        mode: Option<StatsMode>,
        /// CSV input; overrides `stats.input`.
        #[arg(long)]
        input: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Gw,
    Dp,
    Csl,
}

fn parse_scenario(s: &str) -> Result<ScenarioLabel, String> {
    ScenarioLabel::parse(s)
        .ok_or_else(|| format!("unknown scenario `{s}` (current, next_generation, mhz_device)"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            return Err(CliError::User("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::User(format!("thread pool: {e}")))?;
    }
    let loaded = config::load(&cli.global.config)?;
    loaded.config.validate()?;
    let request = commands::Request::new(&cli.command, &cli.global, &loaded)?;
    let output = commands::execute(&request, &loaded)?;

    match &cli.global.out {
        Some(path) => std::fs::write(path, &output)
            .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&output)
                .map_err(|e| CliError::User(format!("stdout: {e}")))?;
        }
    }

    if cli.global.verify {
        let written = match &cli.global.out {
            Some(path) => std::fs::read(path)
                .map_err(|e| CliError::User(format!("cannot re-read {}: {e}", path.display())))?,
            None => output.clone(),
        };
        commands::verify(&request, &loaded, &written)?;
        eprintln!("verify: ok ({})", request.hash);
    }
    Ok(())
}
