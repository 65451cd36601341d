use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ght::{run, Command, RunOptions};

/// Geometric transformer experiments.
#[derive(Debug, Parser)]
#[command(name = "ght", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Refuse to default unspecified constants.
    #[arg(long)]
    strict: bool,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { config: cli.config, out: cli.out, seed: cli.seed, strict: cli.strict, threads: cli.threads };
    match run(cli.command, &opts) {
        Ok(m) => {
            println!("{}: wrote {} files", m.command, m.outputs.len());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
