//! `consistency`: quantify the training-inference mismatch between
//! streaming and offline encoding.
//!
//! For each seeded synthetic stream and each mode, the command runs
//! the streaming encoder chunk by chunk and compares
//!
//! - final center outputs against `offline_encode` (relative
//!   deviation; zero when streaming is consistent),
//! - each step's provisional trailing outputs against the same rows'
//!   final values (the mismatch the shiftable scheme addresses),
//!
//! and reports per-step segment-encode counts and per-chunk wall
//! times (first-half vs second-half means expose any growth of
//! per-chunk cost with stream position).

use crate::config::{CommonOpts, RunConfig};
use crate::error::{config_error, CliResult};
use clap::Args;
use segstream::{
    math::max_relative_row_deviation, offline_encode, synthetic_frames, EncoderWeights, Mat, Mode,
    SegmentOutput, StreamingEncoder,
};
use std::time::Instant;

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Number of synthetic streams.
    #[arg(long, default_value_t = 20)]
    pub records: usize,
    /// Frames per stream (must be a multiple of the chunk size).
    #[arg(long, default_value_t = 640)]
    pub frames: usize,
}

struct ModeReport {
    final_dev: f64,
    worst_provisional_dev: f64,
    max_step_encodes: usize,
    finish_encodes: usize,
    steps: usize,
    first_half_mean_ms: f64,
    second_half_mean_ms: f64,
}

fn run_mode(
    weights: &EncoderWeights,
    cfg: &RunConfig,
    mode: Mode,
    frames: &Mat,
) -> CliResult<ModeReport> {
    let layout = cfg.layout()?;
    let mut encoder =
        StreamingEncoder::new(weights.clone(), layout, mode).map_err(config_error)?;

    let chunks = frames.rows() / layout.chunk;
    let mut finals: Vec<SegmentOutput> = Vec::new();
    let mut snapshots: Vec<Vec<SegmentOutput>> = Vec::new();
    let mut max_step_encodes = 0usize;
    let mut step_ms = Vec::with_capacity(chunks);
    for i in 0..chunks {
        let chunk = frames.slice_rows(i * layout.chunk, (i + 1) * layout.chunk);
        let started = Instant::now();
        let step = encoder.push_chunk(&chunk).map_err(config_error)?;
        step_ms.push(started.elapsed().as_secs_f64() * 1e3);
        max_step_encodes = max_step_encodes.max(step.encodes);
        finals.extend(step.finalized);
        snapshots.push(step.provisional);
    }
    let finish = encoder.finish().map_err(config_error)?;
    let finish_encodes = finish.encodes;
    finals.extend(finish.finalized);

    // Final streaming outputs vs the offline decomposition.
    let mut streamed = Mat::zeros(0, weights.config.d_model);
    for output in &finals {
        streamed = streamed.vstack(&output.rows);
    }
    let offline = offline_encode(weights, &layout, mode, frames).map_err(config_error)?;
    let final_dev = max_relative_row_deviation(&streamed, &offline);

    // Each provisional snapshot vs the same rows once finalized. A
    // provisional center always starts where the final center starts,
    // so the comparison is a row-prefix.
    let mut worst_provisional_dev = 0.0f64;
    for snapshot in &snapshots {
        for provisional in snapshot {
            let finalized = &finals[provisional.index - 1];
            debug_assert_eq!(finalized.index, provisional.index);
            debug_assert_eq!(finalized.center.start, provisional.center.start);
            let prefix = finalized.rows.slice_rows(0, provisional.rows.rows());
            worst_provisional_dev =
                worst_provisional_dev.max(max_relative_row_deviation(&provisional.rows, &prefix));
        }
    }

    let half = step_ms.len() / 2;
    let mean = |xs: &[f64]| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    Ok(ModeReport {
        final_dev,
        worst_provisional_dev,
        max_step_encodes,
        finish_encodes,
        steps: chunks,
        first_half_mean_ms: mean(&step_ms[..half]),
        second_half_mean_ms: mean(&step_ms[half..]),
    })
}

pub fn run(args: &ConsistencyArgs) -> CliResult<()> {
    let cfg = RunConfig::resolve(&args.common)?;
    let layout = cfg.layout()?;
    if args.records == 0 {
        return Err(config_error("records must be >= 1"));
    }
    if args.frames == 0 || args.frames % layout.chunk != 0 {
        return Err(config_error(format!(
            "frames must be a positive multiple of the chunk size {}",
            layout.chunk
        )));
    }
    let weights =
        EncoderWeights::seeded(cfg.encoder_config(), cfg.seed).map_err(config_error)?;

    let mut shiftable_max_final = 0.0f64;
    let mut baseline_max_final = 0.0f64;
    let mut shiftable_min_worst_prov = f64::INFINITY;
    let mut baseline_min_worst_prov = f64::INFINITY;
    let mut max_step_encodes = 0usize;
    let mut first_half = Vec::new();
    let mut second_half = Vec::new();

    for record in 0..args.records {
        let frames = synthetic_frames(
            args.frames,
            cfg.input_dim,
            cfg.seed.wrapping_add(1 + record as u64),
        );
        for mode in [Mode::Baseline, Mode::Shiftable] {
            let report = run_mode(&weights, &cfg, mode, &frames)?;
            println!(
                "record=syn-{record:03} mode={mode} final_dev={:.3e} \
                 worst_provisional_dev={:.3e} max_step_encodes={} finish_encodes={} \
                 steps={} first_half_mean_ms={:.4} second_half_mean_ms={:.4}",
                report.final_dev,
                report.worst_provisional_dev,
                report.max_step_encodes,
                report.finish_encodes,
                report.steps,
                report.first_half_mean_ms,
                report.second_half_mean_ms,
            );
            match mode {
                Mode::Baseline => {
                    baseline_max_final = baseline_max_final.max(report.final_dev);
                    baseline_min_worst_prov =
                        baseline_min_worst_prov.min(report.worst_provisional_dev);
                }
                Mode::Shiftable => {
                    shiftable_max_final = shiftable_max_final.max(report.final_dev);
                    shiftable_min_worst_prov =
                        shiftable_min_worst_prov.min(report.worst_provisional_dev);
                }
            }
            max_step_encodes = max_step_encodes.max(report.max_step_encodes);
            first_half.push(report.first_half_mean_ms);
            second_half.push(report.second_half_mean_ms);
        }
    }

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    println!(
        "summary records={} shiftable_max_final_dev={:.3e} baseline_max_final_dev={:.3e} \
         baseline_min_worst_provisional_dev={:.3e} shiftable_min_worst_provisional_dev={:.3e} \
         max_step_encodes={} first_half_mean_ms={:.4} second_half_mean_ms={:.4}",
        args.records,
        shiftable_max_final,
        baseline_max_final,
        baseline_min_worst_prov,
        shiftable_min_worst_prov,
        max_step_encodes,
        mean(&first_half),
        mean(&second_half),
    );
    Ok(())
}
