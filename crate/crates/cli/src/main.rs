//! `segstream`: streaming segmentation pipeline harness.
//!
//! Subcommands: `trace` (per-step segment decompositions), `simulate`
//! (simultaneous translation over a corpus), `replay` (metrics from
//! stored traces), `consistency` (streaming-vs-offline mismatch
//! report), `bleu`, and `al` (standalone metric calculators).
//!
//! Exit codes: 0 success, 1 usage/config problems, 2 data problems.

mod commands;
mod config;
mod corpus;
mod error;
mod report;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "segstream",
    version,
    about = "Streaming segment scheduling and simultaneous translation harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print per-step segment decompositions for a chunked stream.
    Trace(commands::trace::TraceArgs),
    /// Run simultaneous translation over a corpus.
    Simulate(commands::simulate::SimulateArgs),
    /// Recompute the metrics summary from stored traces.
    Replay(commands::replay::ReplayArgs),
    /// Report streaming-vs-offline encoder mismatch and per-chunk cost.
    Consistency(commands::consistency::ConsistencyArgs),
    /// BLEU between line-aligned text files.
    Bleu(commands::bleu::BleuArgs),
    /// Average Lagging from explicit emission times.
    Al(commands::al::AlArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print to stdout and exit 0; real parse
            // errors exit 1 (clap's default of 2 is reserved here for
            // data problems).
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Trace(args) => commands::trace::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Replay(args) => commands::replay::run(args),
        Command::Consistency(args) => commands::consistency::run(args),
        Command::Bleu(args) => commands::bleu::run(args),
        Command::Al(args) => commands::al::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
