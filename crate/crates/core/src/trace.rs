//! Instance traces: the serialized record of one simultaneous run.
//!
//! One trace captures everything needed to recompute metrics without
//! re-running the models: the read/write action string, per-token
//! emission times under the chosen compute model and under the ideal
//! (compute-free) clock, the emitted token ids, padding and source
//! length bookkeeping, the optional reference text, and an echo of the
//! configuration the run used. Traces serialize as one JSON object per
//! line, so corpora of traces concatenate and stream trivially.

use crate::error::CoreResult;
use crate::scheduler::Mode;
use serde::{Deserialize, Serialize};

/// Echo of the configuration a trace was produced under. Sufficient
/// to re-create the exact pipeline (all model shapes and seeds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub mode: Mode,
    pub left: usize,
    pub center: usize,
    pub right: usize,
    pub chunk: usize,
    pub subsample: usize,
    pub wait_k: usize,
    pub pre_decision: usize,
    pub banks: usize,
    pub clip: usize,
    pub model_dim: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub heads: usize,
    pub vocab: usize,
    pub max_len: usize,
    pub input_dim: usize,
    pub frame_ms: f64,
    pub compute: String,
    pub seed: u64,
}

/// Full record of one simultaneous translation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceTrace {
    pub id: String,
    /// Read/write decisions in order, e.g. `"RRRRRWRW..."`. The
    /// terminating end-of-sequence write is included.
    pub actions: String,
    /// Clock time of each emitted token under the trace's compute
    /// model. End-of-sequence is not an emission.
    pub emissions_ms: Vec<f64>,
    /// Arrival time of the newest source frame read before each
    /// emission: the compute-free emission clock.
    pub emissions_ideal_ms: Vec<f64>,
    /// Emitted token ids (no BOS, no EOS).
    pub tokens: Vec<u32>,
    /// Token ids joined with single spaces.
    pub text: String,
    /// Whether the source was right-padded to a whole chunk.
    pub padded: bool,
    /// Original (unpadded) source length in frames.
    pub source_frames: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    pub config: TraceConfig,
}

impl InstanceTrace {
    /// Serialize as a single JSON line (no trailing newline).
    pub fn to_json_line(&self) -> CoreResult<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parse one JSON line.
    pub fn from_json_line(line: &str) -> CoreResult<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> InstanceTrace {
        InstanceTrace {
            id: "ex1".into(),
            actions: "RRWW".into(),
            emissions_ms: [640.0, 650.0].into(),
            emissions_ideal_ms: [640.0, 640.0].into(),
            tokens: [7, 3].into(),
            text: "7 3".into(),
            padded: false,
            source_frames: 64,
            reference: Some("7 3".into()),
            config: TraceConfig {
                mode: Mode::Shiftable,
                left: 32,
                center: 64,
                right: 32,
                chunk: 32,
                subsample: 4,
                wait_k: 5,
                pre_decision: 8,
                banks: 3,
                clip: 16,
                model_dim: 16,
                enc_layers: 1,
                dec_layers: 1,
                heads: 4,
                vocab: 32,
                max_len: 8,
                input_dim: 8,
                frame_ms: 10.0,
                compute: "zero".into(),
                seed: 1,
            },
        }
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let trace = sample();
        let line = trace.to_json_line().unwrap();
        assert!(!line.contains('\n'));
        let back = InstanceTrace::from_json_line(&line).unwrap();
        assert_eq!(back, trace);
        // Re-serialization is byte-stable.
        assert_eq!(back.to_json_line().unwrap(), line);
    }

    #[test]
    fn missing_reference_is_omitted() {
        let mut trace = sample();
        trace.reference = None;
        let line = trace.to_json_line().unwrap();
        assert!(!line.contains("reference"));
        assert_eq!(InstanceTrace::from_json_line(&line).unwrap(), trace);
    }

    #[test]
    fn malformed_line_is_an_error() {
        assert!(InstanceTrace::from_json_line("{\"id\": \"x\"").is_err());
        assert!(InstanceTrace::from_json_line("").is_err());
    }

    #[test]
    fn mode_serializes_lowercase() {
        let line = sample().to_json_line().unwrap();
        assert!(line.contains("\"mode\":\"shiftable\""));
    }
}
