mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{asymptotics, bf, laplace, simulate};

/// Point-null and peri-null Bayes factors for the t-test.
#[derive(Debug, Parser)]
#[command(name = "perinull", version, args_override_self = true)]
struct Cli {
    /// File of key=value lines supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a Bayes factor from a t statistic or group summaries.
    Bf(bf::BfArgs),
    /// Evaluate the large-sample theory of the peri-null Bayes factor.
    Asymptotics(asymptotics::AsymptoticsArgs),
    /// Run the seeded Monte Carlo study and write curves.csv.
    Simulate(simulate::SimulateArgs),
    /// Compare the Laplace expansion with exact marginal likelihoods.
    LaplaceVerify(laplace::LaplaceArgs),
}

/// Failure classes, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<perinull::Error> for CliError {
    fn from(e: perinull::Error) -> Self {
        match e {
            perinull::Error::InvalidInput(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

const SUBCOMMANDS: [&str; 4] = ["bf", "asymptotics", "simulate", "laplace-verify"];

fn run() -> CliResult<()> {
    let raw: Vec<String> = std::env::args().collect();
    let args = config::merge_config_file(raw, &SUBCOMMANDS)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests print and succeed; everything else is usage
            let code = e.exit_code();
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let _ = cli.config;
    match cli.command {
        Command::Bf(a) => bf::run(a),
        Command::Asymptotics(a) => asymptotics::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::LaplaceVerify(a) => laplace::run(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
