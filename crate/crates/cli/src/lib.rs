//! `splice`: retrieval-and-splice derivation pipeline over JSONL corpora.
//!
//! Exit codes: 0 success, 1 data or usage error, 2 verification failure.

pub mod commands;
pub mod config;
pub mod embeddings;
pub mod errors;
pub mod schema;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

use commands::derive::DeriveArgs;
use commands::replay::ReplayArgs;
use commands::retrieve::RetrieveArgs;
use commands::stats::StatsArgs;
use commands::verify::VerifyArgs;
use errors::CliError;

#[derive(Parser)]
#[command(
    name = "splice",
    version,
    about = "Retrieve neighbors, derive splice-action sequences, and verify them over JSONL corpora"
)]
struct Cli {
    /// Key=value config file mirroring the flags; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Attach nearest-neighbor lists to every example.
    Retrieve(RetrieveArgs),
    /// Compute and attach replay-verified derivations.
    Derive(DeriveArgs),
    /// Report per-policy action counts and parse-time scaling.
    Stats(StatsArgs),
    /// Cross-check the parser against exhaustive search on random instances.
    Verify(VerifyArgs),
    /// Print one stored derivation step by step and re-verify it.
    Replay(ReplayArgs),
}

pub fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let argv = match config::find_config_path(&argv) {
        Some(path) => {
            let entries = config::parse_config(&path)?;
            config::inject_config(&Cli::command(), argv, &entries)?
        }
        None => argv,
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => return Err(CliError::data(e.to_string())),
    };
    match &cli.command {
        Commands::Retrieve(args) => commands::retrieve::run(args),
        Commands::Derive(args) => commands::derive::run(args),
        Commands::Stats(args) => commands::stats::run(args),
        Commands::Verify(args) => commands::verify::run(args),
        Commands::Replay(args) => commands::replay::run(args),
    }
}
