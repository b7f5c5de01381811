//! Simultaneous translation driver: wires the streaming encoder, the
//! wait-k policy, and the toy decoder into a clocked read/write loop.
//!
//! Each READ pulls one pre-decision unit (`pre_decision × subsample`
//! frames, a whole number of chunks) into the encoder and advances the
//! clock to the arrival time of the newest frame plus modeled compute;
//! each WRITE decodes one token against the encoder rows visible so
//! far and stamps it with the current clock. When a READ finds the
//! source exhausted, the encoder is flushed and the policy switches to
//! writing until end-of-sequence.
//!
//! Compute time is pluggable: a zero-cost ideal clock, a fixed cost
//! per encoder/decoder invocation (deterministic computation-aware
//! traces), or measured wall time.

use crate::decoder::{policy_action, Action, Decoder, DecoderConfig, EOS};
use crate::encoder::{EncoderStep, StreamingEncoder};
use crate::error::{CoreError, CoreResult};
use crate::layout::SegmentLayout;
use crate::math::Mat;
use crate::scheduler::Mode;
use crate::trace::{InstanceTrace, TraceConfig};
use crate::weights::{EncoderConfig, EncoderWeights};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// How much clock time one encoder or decoder invocation costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComputeModel {
    /// Ideal clock: computation is free.
    Zero,
    /// Constant milliseconds per invocation — deterministic
    /// computation-aware traces.
    FixedPerStep { ms: f64 },
    /// Wall-clock time of each invocation (not reproducible).
    Measured,
}

impl ComputeModel {
    fn cost_ms(&self, started: Instant) -> f64 {
        match self {
            ComputeModel::Zero => 0.0,
            ComputeModel::FixedPerStep { ms } => *ms,
            ComputeModel::Measured => started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

impl FromStr for ComputeModel {
    type Err = CoreError;

    fn from_str(s: &str) -> CoreResult<Self> {
        if s == "zero" {
            return Ok(ComputeModel::Zero);
        }
        if s == "measured" {
            return Ok(ComputeModel::Measured);
        }
        if let Some(ms) = s.strip_prefix("fixed:") {
            let ms: f64 = ms.parse().map_err(|_| {
                CoreError::InvalidConfig(format!("bad fixed compute cost {ms:?}"))
            })?;
            if !ms.is_finite() || ms < 0.0 {
                return Err(CoreError::InvalidConfig(
                    "fixed compute cost must be finite and non-negative".into(),
                ));
            }
            return Ok(ComputeModel::FixedPerStep { ms });
        }
        Err(CoreError::InvalidConfig(format!(
            "unknown compute model {s:?}; expected zero, fixed:<ms>, or measured"
        )))
    }
}

impl fmt::Display for ComputeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComputeModel::Zero => write!(f, "zero"),
            ComputeModel::FixedPerStep { ms } => write!(f, "fixed:{ms}"),
            ComputeModel::Measured => write!(f, "measured"),
        }
    }
}

/// Streaming-side knobs of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub layout: SegmentLayout,
    pub mode: Mode,
    pub wait_k: usize,
    /// Encoder output rows grouped into one READ unit.
    pub pre_decision: usize,
    /// Arrival period of one source frame, in milliseconds.
    pub frame_ms: f64,
    pub compute: ComputeModel,
}

impl SimulationConfig {
    pub fn validate(&self) -> CoreResult<()> {
        if self.wait_k == 0 {
            return Err(CoreError::InvalidConfig("wait_k must be >= 1".into()));
        }
        if self.pre_decision == 0 {
            return Err(CoreError::InvalidConfig(
                "pre_decision must be >= 1".into(),
            ));
        }
        if !self.frame_ms.is_finite() || self.frame_ms <= 0.0 {
            return Err(CoreError::InvalidConfig(
                "frame_ms must be positive and finite".into(),
            ));
        }
        let unit = self.pre_decision * self.layout.subsample;
        if unit % self.layout.chunk != 0 {
            return Err(CoreError::InvalidConfig(format!(
                "read unit of {unit} frames (pre_decision {} x subsample {}) \
                 must be a whole number of {}-frame chunks",
                self.pre_decision, self.layout.subsample, self.layout.chunk
            )));
        }
        Ok(())
    }

    /// Frames consumed by one READ.
    pub fn read_unit_frames(&self) -> usize {
        self.pre_decision * self.layout.subsample
    }
}

/// A ready-to-run pipeline: seeded encoder weights, seeded decoder,
/// and the streaming configuration. One simulator runs any number of
/// independent streams.
#[derive(Debug, Clone)]
pub struct Simulator {
    sim: SimulationConfig,
    weights: EncoderWeights,
    decoder: Decoder,
    seed: u64,
}

impl Simulator {
    /// Build the pipeline. The decoder is seeded with `seed + 1` so
    /// the two models draw distinct weights from one run seed. The
    /// toy pipeline keeps encoder and decoder dimensions and head
    /// counts equal so a trace's config echo fully determines it.
    pub fn new(
        sim: SimulationConfig,
        enc: EncoderConfig,
        dec: DecoderConfig,
        seed: u64,
    ) -> CoreResult<Self> {
        sim.validate()?;
        if sim.layout.subsample != enc.subsample {
            return Err(CoreError::InvalidConfig(format!(
                "layout subsample {} does not match encoder subsample {}",
                sim.layout.subsample, enc.subsample
            )));
        }
        if dec.d_enc != enc.d_model || dec.d_model != enc.d_model || dec.heads != enc.heads {
            return Err(CoreError::InvalidConfig(
                "decoder dimension and heads must match the encoder".into(),
            ));
        }
        let weights = EncoderWeights::seeded(enc, seed)?;
        let decoder = Decoder::seeded(dec, seed.wrapping_add(1))?;
        Ok(Self {
            sim,
            weights,
            decoder,
            seed,
        })
    }

    pub fn sim_config(&self) -> &SimulationConfig {
        &self.sim
    }

    pub fn encoder_weights(&self) -> &EncoderWeights {
        &self.weights
    }

    pub fn decoder(&self) -> &Decoder {
        &self.decoder
    }

    /// Configuration echo embedded in every trace.
    pub fn trace_config(&self) -> TraceConfig {
        let enc = &self.weights.config;
        let dec = self.decoder.config();
        TraceConfig {
            mode: self.sim.mode,
            left: self.sim.layout.left,
            center: self.sim.layout.center,
            right: self.sim.layout.right,
            chunk: self.sim.layout.chunk,
            subsample: self.sim.layout.subsample,
            wait_k: self.sim.wait_k,
            pre_decision: self.sim.pre_decision,
            banks: enc.banks,
            clip: enc.clip,
            model_dim: enc.d_model,
            enc_layers: enc.layers,
            dec_layers: dec.layers,
            heads: enc.heads,
            vocab: dec.vocab,
            max_len: dec.max_len,
            input_dim: enc.d_in,
            frame_ms: self.sim.frame_ms,
            compute: self.sim.compute.to_string(),
            seed: self.seed,
        }
    }

    /// Run the read/write loop over one source stream.
    ///
    /// The source is right-padded with zero frames to a whole chunk if
    /// needed (recorded in the trace); arrival times are clamped to
    /// the last real frame, since padding never travels the wire.
    pub fn translate_stream(
        &self,
        id: &str,
        frames: &Mat,
        reference: Option<String>,
    ) -> CoreResult<InstanceTrace> {
        let layout = self.sim.layout;
        let h = layout.chunk;
        let d_in = self.weights.config.d_in;
        let d_model = self.weights.config.d_model;
        if frames.rows() == 0 {
            return Err(CoreError::EmptyInput("source stream has no frames".into()));
        }
        if frames.cols() != d_in {
            return Err(CoreError::Precondition(format!(
                "source frame dimension {} does not match encoder input {}",
                frames.cols(),
                d_in
            )));
        }

        let source_frames = frames.rows();
        let padded_len = source_frames.next_multiple_of(h);
        let padded = padded_len != source_frames;
        let full = if padded {
            frames.vstack(&Mat::zeros(padded_len - source_frames, d_in))
        } else {
            frames.clone()
        };
        let total_chunks = padded_len / h;
        let chunks_per_read = self.sim.read_unit_frames() / h;

        let mut encoder = StreamingEncoder::new(self.weights.clone(), layout, self.sim.mode)?;
        // Finalized rows accumulate; provisional rows are replaced by
        // each step's trailing outputs. Together they tile the frames
        // read so far, so row count == frames_read / subsample.
        let mut final_rows = Mat::zeros(0, d_model);
        let mut provisional = Mat::zeros(0, d_model);
        let absorb = |final_rows: &mut Mat, provisional: &mut Mat, step: &EncoderStep| {
            for out in &step.finalized {
                *final_rows = final_rows.vstack(&out.rows);
            }
            *provisional = Mat::zeros(0, d_model);
            for out in &step.provisional {
                *provisional = provisional.vstack(&out.rows);
            }
        };

        let mut chunks_fed = 0usize;
        let mut reads = 0usize;
        let mut actions = String::new();
        let mut tokens: Vec<u32> = Vec::new();
        let mut emissions_ms = Vec::new();
        let mut emissions_ideal_ms = Vec::new();
        let mut clock = 0.0_f64;
        let mut source_finished = false;
        let arrival_ms = |chunks: usize| (chunks * h).min(source_frames) as f64 * self.sim.frame_ms;

        loop {
            match policy_action(self.sim.wait_k, reads, tokens.len(), source_finished) {
                Action::Read if chunks_fed == total_chunks => {
                    // This read discovers end-of-stream: flush the
                    // encoder instead. Not recorded as an R — no
                    // frames were consumed.
                    let started = Instant::now();
                    let step = encoder.finish()?;
                    let cost = self.sim.compute.cost_ms(started);
                    absorb(&mut final_rows, &mut provisional, &step);
                    source_finished = true;
                    clock = clock.max(arrival_ms(total_chunks)) + cost;
                }
                Action::Read => {
                    let feed = chunks_per_read.min(total_chunks - chunks_fed);
                    let mut cost = 0.0;
                    for _ in 0..feed {
                        let chunk = full.slice_rows(chunks_fed * h, (chunks_fed + 1) * h);
                        let started = Instant::now();
                        let step = encoder.push_chunk(&chunk)?;
                        cost += self.sim.compute.cost_ms(started);
                        chunks_fed += 1;
                        absorb(&mut final_rows, &mut provisional, &step);
                    }
                    reads += 1;
                    actions.push('R');
                    clock = clock.max(arrival_ms(chunks_fed)) + cost;
                }
                Action::Write => {
                    let enc_all = final_rows.vstack(&provisional);
                    let visible = if source_finished {
                        enc_all.rows()
                    } else {
                        (reads * self.sim.pre_decision).min(enc_all.rows())
                    };
                    let started = Instant::now();
                    let next = self.decoder.decode_step(&enc_all, visible, &tokens)?;
                    clock += self.sim.compute.cost_ms(started);
                    actions.push('W');
                    if next == EOS {
                        break;
                    }
                    tokens.push(next);
                    emissions_ms.push(clock);
                    emissions_ideal_ms.push(arrival_ms(chunks_fed));
                }
            }
        }

        let text = tokens
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        Ok(InstanceTrace {
            id: id.to_string(),
            actions,
            emissions_ms,
            emissions_ideal_ms,
            tokens,
            text,
            padded,
            source_frames,
            reference,
            config: self.trace_config(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synthetic_frames;

    fn small_simulator(mode: Mode, wait_k: usize, compute: ComputeModel) -> Simulator {
        let layout = SegmentLayout::default_layout();
        Simulator::new(
            SimulationConfig {
                layout,
                mode,
                wait_k,
                pre_decision: 8,
                frame_ms: 10.0,
                compute,
            },
            EncoderConfig {
                d_model: 16,
                layers: 1,
                heads: 4,
                banks: 2,
                clip: 4,
                subsample: 4,
                d_in: 8,
            },
            DecoderConfig {
                d_model: 16,
                layers: 1,
                heads: 4,
                d_enc: 16,
                vocab: 32,
                max_len: 12,
            },
            7,
        )
        .unwrap()
    }

    #[test]
    fn compute_model_parses_and_prints() {
        assert_eq!("zero".parse::<ComputeModel>().unwrap(), ComputeModel::Zero);
        assert_eq!(
            "fixed:2.5".parse::<ComputeModel>().unwrap(),
            ComputeModel::FixedPerStep { ms: 2.5 }
        );
        assert_eq!(
            "measured".parse::<ComputeModel>().unwrap(),
            ComputeModel::Measured
        );
        assert!("fixed:-1".parse::<ComputeModel>().is_err());
        assert!("fast".parse::<ComputeModel>().is_err());
        assert_eq!(ComputeModel::FixedPerStep { ms: 2.0 }.to_string(), "fixed:2");
        assert_eq!(ComputeModel::Zero.to_string(), "zero");
    }

    #[test]
    fn read_unit_must_align_with_chunks() {
        let mut sim = SimulationConfig {
            layout: SegmentLayout::default_layout(),
            mode: Mode::Shiftable,
            wait_k: 5,
            pre_decision: 8,
            frame_ms: 10.0,
            compute: ComputeModel::Zero,
        };
        assert!(sim.validate().is_ok());
        sim.pre_decision = 3; // 12 frames, not a whole 32-frame chunk
        assert!(sim.validate().is_err());
        sim.pre_decision = 16; // two chunks per read
        assert!(sim.validate().is_ok());
    }

    #[test]
    fn first_emission_lands_at_wait_k_arrival() {
        // k reads of pre_decision * subsample frames at 10 ms each:
        // 5 * 8 * 4 * 10 = 1600 ms, exact under the zero-cost clock.
        let sim = small_simulator(Mode::Shiftable, 5, ComputeModel::Zero);
        let frames = synthetic_frames(512, 8, 3);
        let trace = sim.translate_stream("t", &frames, None).unwrap();
        assert!(!trace.tokens.is_empty(), "decoder emitted nothing: {trace:?}");
        assert_eq!(trace.emissions_ms[0], 1600.0);
        assert_eq!(trace.emissions_ideal_ms[0], 1600.0);
        assert!(trace.actions.starts_with("RRRRRW"));
    }

    #[test]
    fn read_count_law_holds_before_source_end() {
        let sim = small_simulator(Mode::Shiftable, 3, ComputeModel::Zero);
        let frames = synthetic_frames(640, 8, 11);
        let trace = sim.translate_stream("t", &frames, None).unwrap();
        // At the write of token i (1-based, before source end),
        // exactly wait_k + i - 1 reads have happened.
        let mut reads = 0usize;
        let mut writes = 0usize;
        let total_reads = trace.actions.chars().filter(|&a| a == 'R').count();
        for action in trace.actions.chars() {
            match action {
                'R' => reads += 1,
                'W' => {
                    writes += 1;
                    if reads < total_reads {
                        assert_eq!(reads, 3 + writes - 1);
                    }
                }
                other => panic!("unexpected action {other}"),
            }
        }
    }

    #[test]
    fn traces_are_byte_identical_across_runs() {
        let frames = synthetic_frames(320, 8, 9);
        let a = small_simulator(Mode::Baseline, 2, ComputeModel::FixedPerStep { ms: 3.0 })
            .translate_stream("t", &frames, Some("1 2".into()))
            .unwrap();
        let b = small_simulator(Mode::Baseline, 2, ComputeModel::FixedPerStep { ms: 3.0 })
            .translate_stream("t", &frames, Some("1 2".into()))
            .unwrap();
        assert_eq!(
            a.to_json_line().unwrap(),
            b.to_json_line().unwrap()
        );
    }

    #[test]
    fn fixed_compute_shifts_the_clock_but_not_the_ideal_clock() {
        let frames = synthetic_frames(320, 8, 9);
        let zero = small_simulator(Mode::Shiftable, 2, ComputeModel::Zero)
            .translate_stream("t", &frames, None)
            .unwrap();
        let fixed = small_simulator(Mode::Shiftable, 2, ComputeModel::FixedPerStep { ms: 5.0 })
            .translate_stream("t", &frames, None)
            .unwrap();
        assert_eq!(zero.actions, fixed.actions);
        assert_eq!(zero.tokens, fixed.tokens);
        assert_eq!(zero.emissions_ideal_ms, fixed.emissions_ideal_ms);
        for (z, f) in zero.emissions_ms.iter().zip(&fixed.emissions_ms) {
            assert!(f > z, "fixed compute did not delay an emission");
        }
    }

    #[test]
    fn emission_clock_is_monotone_and_lower_bounded() {
        for mode in [Mode::Baseline, Mode::Shiftable] {
            let sim = small_simulator(mode, 4, ComputeModel::FixedPerStep { ms: 1.5 });
            let frames = synthetic_frames(448, 8, 4);
            let trace = sim.translate_stream("t", &frames, None).unwrap();
            let floor = 4.0 * 8.0 * 4.0 * 10.0;
            for pair in trace.emissions_ms.windows(2) {
                assert!(pair[1] >= pair[0]);
            }
            if let Some(&first) = trace.emissions_ms.first() {
                assert!(first >= floor);
            }
        }
    }

    #[test]
    fn causality_under_truncation() {
        // Tokens written before the source ran out must be unchanged
        // when the future of the stream is cut off.
        let sim = small_simulator(Mode::Shiftable, 2, ComputeModel::Zero);
        let long = synthetic_frames(640, 8, 21);
        let full = sim.translate_stream("t", &long, None).unwrap();

        let cut_frames = 320; // 10 chunks, a whole read unit boundary
        let truncated = long.slice_rows(0, cut_frames);
        let cut = sim.translate_stream("t", &truncated, None).unwrap();

        // Count tokens the truncated run emitted before its source
        // ended: writes that precede the final R.
        let last_read = cut.actions.rfind('R').unwrap();
        let pre_end_tokens = cut.actions[..last_read]
            .chars()
            .filter(|&a| a == 'W')
            .count();
        assert!(pre_end_tokens > 0, "no pre-end tokens to compare");
        assert_eq!(
            cut.tokens[..pre_end_tokens],
            full.tokens[..pre_end_tokens],
            "early tokens changed when the future was truncated"
        );
    }

    #[test]
    fn wait_k_beyond_source_reads_everything_first() {
        let sim = small_simulator(Mode::Shiftable, 100, ComputeModel::Zero);
        let frames = synthetic_frames(256, 8, 2);
        let trace = sim.translate_stream("t", &frames, None).unwrap();
        // 256 frames = 8 read units; all reads precede all writes.
        let first_w = trace.actions.find('W').unwrap();
        assert_eq!(&trace.actions[..first_w], "RRRRRRRR");
        let source_ms = 256.0 * 10.0;
        for &e in &trace.emissions_ms {
            assert!(e >= source_ms);
        }
        for &e in &trace.emissions_ideal_ms {
            assert_eq!(e, source_ms);
        }
    }

    #[test]
    fn ragged_source_is_padded_and_flagged() {
        let sim = small_simulator(Mode::Shiftable, 2, ComputeModel::Zero);
        let frames = synthetic_frames(300, 8, 5); // not a multiple of 32
        let trace = sim.translate_stream("t", &frames, None).unwrap();
        assert!(trace.padded);
        assert_eq!(trace.source_frames, 300);
        // Arrival times never exceed the last real frame.
        for &e in &trace.emissions_ideal_ms {
            assert!(e <= 3000.0);
        }
        let aligned = sim
            .translate_stream("t", &synthetic_frames(320, 8, 5), None)
            .unwrap();
        assert!(!aligned.padded);
    }

    #[test]
    fn rejects_empty_and_misshapen_sources() {
        let sim = small_simulator(Mode::Shiftable, 2, ComputeModel::Zero);
        assert!(matches!(
            sim.translate_stream("t", &Mat::zeros(0, 8), None),
            Err(CoreError::EmptyInput(_))
        ));
        assert!(matches!(
            sim.translate_stream("t", &synthetic_frames(64, 5, 1), None),
            Err(CoreError::Precondition(_))
        ));
    }

    #[test]
    fn mismatched_pipeline_dims_are_rejected() {
        let layout = SegmentLayout::default_layout();
        let sim = SimulationConfig {
            layout,
            mode: Mode::Shiftable,
            wait_k: 5,
            pre_decision: 8,
            frame_ms: 10.0,
            compute: ComputeModel::Zero,
        };
        let enc = EncoderConfig {
            d_model: 16,
            layers: 1,
            heads: 4,
            banks: 2,
            clip: 4,
            subsample: 4,
            d_in: 8,
        };
        let dec = DecoderConfig {
            d_model: 16,
            layers: 1,
            heads: 4,
            d_enc: 32, // does not match the encoder
            vocab: 32,
            max_len: 12,
        };
        assert!(Simulator::new(sim, enc, dec, 0).is_err());
    }
}
