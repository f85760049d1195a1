//! Batch front end: one JSON experiment spec in, files out.
//!
//! Exit codes: 0 success, 2 validation/config error, 3 verification
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bus_competition::experiment::{self, Command, ExperimentSpec, Format};

#[derive(Parser)]
#[command(
    name = "buscomp",
    about = "Competing bus operators on a circular route: equilibrium solvers, verification, and repeated-game experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON experiment spec.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed; overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format for tabular artifacts.
    #[arg(long, value_parser = parse_format, default_value = "json")]
    format: Format,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        other => Err(format!("unknown format '{other}' (expected csv or json)")),
    }
}

#[derive(Subcommand)]
enum CliCommand {
    /// Solve the stage game at the given positions.
    Solve(Common),
    /// Solve, then check the profile by brute-force grid search.
    Verify(Common),
    /// Simulate repeated-game traces.
    Simulate(Common),
    /// Estimate the survival curve of the escape time N.
    Survival(Common),
    /// Estimate the law of the boundary exit time M (starts at d0 = d).
    Boundary(Common),
    /// Summarize the noisy regime for both modes.
    Noisy(Common),
    /// Re-run an inner command across a parameter axis.
    Sweep(Common),
}

impl CliCommand {
    fn split(self) -> (Command, Common) {
        match self {
            CliCommand::Solve(c) => (Command::Solve, c),
            CliCommand::Verify(c) => (Command::Verify, c),
            CliCommand::Simulate(c) => (Command::Simulate, c),
            CliCommand::Survival(c) => (Command::Survival, c),
            CliCommand::Boundary(c) => (Command::Boundary, c),
            CliCommand::Noisy(c) => (Command::Noisy, c),
            CliCommand::Sweep(c) => (Command::Sweep, c),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = cli.command.split();

    let mut spec = match ExperimentSpec::load(&common.config) {
        Ok(spec) => spec,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    spec.command = Some(command);
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }

    match experiment::run(&spec, &common.out, common.format) {
        Ok(output) => {
            for line in &output.summaries {
                println!("{line}");
            }
            for file in &output.files {
                println!("wrote {}", file.display());
            }
            ExitCode::from(output.exit_code as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
