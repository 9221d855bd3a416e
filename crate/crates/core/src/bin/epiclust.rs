use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use epiclust::pipeline::{run, Stage};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Synth,
    Forecast,
    Embed,
    Cluster,
    Pipeline,
    Evaluate,
}

impl From<Command> for Stage {
    fn from(c: Command) -> Self {
        match c {
            Command::Synth => Stage::Synth,
            Command::Forecast => Stage::Forecast,
            Command::Embed => Stage::Embed,
            Command::Cluster => Stage::Cluster,
            Command::Pipeline => Stage::Pipeline,
            Command::Evaluate => Stage::Evaluate,
        }
    }
}

/// Forecast regional case counts and cluster regions by profile.
#[derive(Debug, Parser)]
#[command(name = "epiclust", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Pipeline config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command.into(), &cli.config, cli.seed, cli.out.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
