//! `al`: Average Lagging from explicit emission times — handy for
//! hand-checking metric values without a trace file.

use crate::error::{config_error, CliResult};
use clap::Args;
use segstream::{average_lagging, LatencyInput};

#[derive(Debug, Args)]
pub struct AlArgs {
    /// Comma-separated emission times in ms, e.g. "20,40".
    #[arg(long)]
    pub emissions: String,
    /// Source length in tokens (|X|).
    #[arg(long = "source-tokens")]
    pub source_tokens: usize,
    /// Duration of one source token in ms (T).
    #[arg(long = "frame-ms", default_value_t = 10.0)]
    pub frame_ms: f64,
    /// Reference length in tokens (|Y*|).
    #[arg(long = "reference-len")]
    pub reference_len: usize,
}

pub fn run(args: &AlArgs) -> CliResult<()> {
    let emissions: Vec<f64> = args
        .emissions
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|e| config_error(format!("bad emission time {v:?}: {e}")))
        })
        .collect::<CliResult<_>>()?;
    let result = average_lagging(&LatencyInput {
        emissions_ms: &emissions,
        source_tokens: args.source_tokens,
        frame_ms: args.frame_ms,
        reference_len: args.reference_len,
    })
    .map_err(config_error)?;
    println!(
        "al_ms={} tau={} flagged={}",
        result.al_ms, result.tau, result.flagged
    );
    Ok(())
}
