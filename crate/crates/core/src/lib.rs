//! Streaming segment scheduling with shiftable context, plus a compact
//! reference pipeline built around it.
//!
//! - [`layout`] / [`plan`] / [`scheduler`] — the segmentation core: how a
//!   chunked stream decomposes into overlapping encoder windows, and when
//!   each window becomes final.
//! - [`encoder`] / [`weights`] — a toy augmented-memory transformer
//!   encoder that consumes segments incrementally.
//! - [`decoder`] / [`simulate`] / [`trace`] — wait-k policy, toy decoder,
//!   and the clocked read/write loop producing instance traces.
//! - [`metrics`] — Average Lagging and BLEU over traces.
//! - [`math`] / [`synth`] — small dense linear algebra and seeded
//!   synthetic sources.

pub mod decoder;
pub mod encoder;
pub mod error;
pub mod layout;
pub mod math;
pub mod metrics;
pub mod plan;
pub mod scheduler;
pub mod simulate;
pub mod synth;
pub mod trace;
pub mod weights;

pub use decoder::{policy_action, Action, Decoder, DecoderConfig, BOS, EOS};
pub use encoder::{
    encode_segment, offline_encode, subsample, BankStack, EncoderStep, FrameBuffer,
    SegmentEncoding, SegmentOutput, StreamingEncoder,
};
pub use error::{CoreError, CoreResult};
pub use layout::SegmentLayout;
pub use math::Mat;
pub use metrics::{
    average_lagging, corpus_bleu, sentence_bleu, AlResult, LatencyInput, Smoothing,
};
pub use plan::{SegmentPlan, Span};
pub use scheduler::{finalize_deadline, offline_plan, plan_at, Mode, Scheduler, StepOutcome};
pub use simulate::{ComputeModel, SimulationConfig, Simulator};
pub use synth::synthetic_frames;
pub use trace::{InstanceTrace, TraceConfig};
pub use weights::{EncoderConfig, EncoderWeights};
