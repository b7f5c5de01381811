//! `trace`: print the per-step segment decompositions of a chunked
//! stream, one line per arriving chunk.

use crate::config::CommonOpts;
use crate::error::{config_error, CliResult};
use clap::Args;
use segstream::Scheduler;

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Number of chunks to stream.
    #[arg(long, default_value_t = 5)]
    pub chunks: usize,
}

/// Milliseconds rendered without a fractional part when whole.
fn format_ms(ms: f64) -> String {
    if ms.fract() == 0.0 {
        format!("{}", ms as i64)
    } else {
        format!("{ms}")
    }
}

pub fn run(args: &TraceArgs) -> CliResult<()> {
    let cfg = crate::config::RunConfig::resolve(&args.common)?;
    let layout = cfg.layout()?;
    if args.chunks == 0 {
        return Err(config_error("chunks must be >= 1"));
    }
    let mut scheduler = Scheduler::new(layout, cfg.mode);
    for step in 1..=args.chunks {
        scheduler.advance().map_err(config_error)?;
        let plans = scheduler
            .plans()
            .iter()
            .map(|p| p.notation())
            .collect::<Vec<_>>()
            .join(" | ");
        let t = (step * layout.chunk) as f64 * cfg.frame_ms;
        println!("t={} | {plans}", format_ms(t));
    }
    Ok(())
}
