use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use subgrad_privacy::scenario::{error_exit_code, execute, load_scenario, prepare, Command, ExecOptions, ExecStatus};

/// Simulate distributed subgradient runs and the malicious-agent attack.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Attack an existing visible trace instead of simulating one.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Oracle file used to score an attack on `--trace`.
    #[arg(long, requires = "trace")]
    oracle: Option<PathBuf>,
}

fn run(cli: Cli) -> subgrad_privacy::Result<ExecStatus> {
    let mut scenario = load_scenario(&cli.scenario)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(h) = cli.horizon {
        scenario.horizon = h;
    }
    prepare(&scenario)?;
    let opts = ExecOptions { out: cli.out, trace: cli.trace, oracle: cli.oracle };
    execute(&scenario, cli.command, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(ExecStatus::Success) => ExitCode::SUCCESS,
        Ok(status @ ExecStatus::Verdict(_)) => {
            if let ExecStatus::Verdict(v) = &status {
                eprintln!("{name}: verdict {v}");
            }
            ExitCode::from(status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{name}: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
