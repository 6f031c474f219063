use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bec_probe::acceptance::AcceptanceOptions;
use bec_probe_cli::{run_command, verify};

#[derive(Parser)]
#[command(name = "bec-probe", version, about = "Qubit probe of condensate decoherence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured probe (and its sweep, if any).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Same as `run`, but the config must contain a [sweep] block.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Verify {
        /// Comma-separated subset, e.g. AC-1,AC-6.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    let outcome = match cli.command {
        Command::Run { config, out } => run_command(&config, &out, false, &mut stdout).map(|_| 0),
        Command::Sweep { config, out } => run_command(&config, &out, true, &mut stdout).map(|_| 0),
        Command::Verify { only } => verify(&AcceptanceOptions::default(), only.as_deref(), &mut stdout),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
