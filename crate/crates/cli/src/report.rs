//! Metric summaries over instance traces: per-instance Average
//! Lagging (computation-aware and ideal) and sentence BLEU, plus
//! corpus aggregates, serialized as JSON and CSV.
//!
//! Per-instance reference length falls back to the hypothesis length
//! when no reference text is available. Instances that emitted no
//! token carry null metrics and count as flagged.

use crate::error::{data_error, CliResult};
use segstream::{
    average_lagging, corpus_bleu, sentence_bleu, InstanceTrace, LatencyInput, Smoothing,
};
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub id: String,
    pub tokens: usize,
    pub source_frames: usize,
    /// No token was emitted at or after source end.
    pub flagged: bool,
    pub first_emission_ms: Option<f64>,
    pub al_ca_ms: Option<f64>,
    pub al_ideal_ms: Option<f64>,
    pub bleu_sentence: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusSummary {
    pub instances: usize,
    pub flagged: usize,
    /// Pooled BLEU over instances with references; null if none have one.
    pub bleu: Option<f64>,
    pub mean_al_ca_ms: Option<f64>,
    pub mean_al_ideal_ms: Option<f64>,
    pub min_first_emission_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub instances: Vec<InstanceSummary>,
    pub corpus: CorpusSummary,
}

fn reference_tokens(trace: &InstanceTrace) -> Option<usize> {
    let n = trace.reference.as_deref()?.split_whitespace().count();
    (n > 0).then_some(n)
}

fn summarize_instance(trace: &InstanceTrace) -> CliResult<InstanceSummary> {
    let reference_len = reference_tokens(trace).unwrap_or(trace.tokens.len());
    let bleu_sentence = match (&trace.reference, reference_tokens(trace)) {
        (Some(reference), Some(_)) => Some(
            sentence_bleu(&trace.text, reference, Smoothing::Exp)
                .map_err(|e| data_error(format!("instance {}: {e}", trace.id)))?,
        ),
        _ => None,
    };
    if trace.tokens.is_empty() {
        return Ok(InstanceSummary {
            id: trace.id.clone(),
            tokens: 0,
            source_frames: trace.source_frames,
            flagged: true,
            first_emission_ms: None,
            al_ca_ms: None,
            al_ideal_ms: None,
            bleu_sentence,
        });
    }
    let al = |emissions: &[f64]| {
        average_lagging(&LatencyInput {
            emissions_ms: emissions,
            source_tokens: trace.source_frames,
            frame_ms: trace.config.frame_ms,
            reference_len,
        })
        .map_err(|e| data_error(format!("instance {}: {e}", trace.id)))
    };
    let ca = al(&trace.emissions_ms)?;
    let ideal = al(&trace.emissions_ideal_ms)?;
    Ok(InstanceSummary {
        id: trace.id.clone(),
        tokens: trace.tokens.len(),
        source_frames: trace.source_frames,
        flagged: ca.flagged || ideal.flagged,
        first_emission_ms: trace.emissions_ms.first().copied(),
        al_ca_ms: Some(ca.al_ms),
        al_ideal_ms: Some(ideal.al_ms),
        bleu_sentence,
    })
}

/// Build the full summary. `traces` must already be sorted by id.
pub fn summarize(traces: &[InstanceTrace]) -> CliResult<Summary> {
    let instances: Vec<InstanceSummary> = traces
        .iter()
        .map(summarize_instance)
        .collect::<CliResult<_>>()?;

    let pairs: Vec<(&str, &str)> = traces
        .iter()
        .filter(|t| reference_tokens(t).is_some())
        .map(|t| (t.text.as_str(), t.reference.as_deref().unwrap()))
        .collect();
    let bleu = if pairs.is_empty() {
        None
    } else {
        Some(corpus_bleu(&pairs).map_err(data_error)?)
    };

    let mean = |values: Vec<f64>| {
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };
    let corpus = CorpusSummary {
        instances: instances.len(),
        flagged: instances.iter().filter(|i| i.flagged).count(),
        bleu,
        mean_al_ca_ms: mean(instances.iter().filter_map(|i| i.al_ca_ms).collect()),
        mean_al_ideal_ms: mean(instances.iter().filter_map(|i| i.al_ideal_ms).collect()),
        min_first_emission_ms: instances
            .iter()
            .filter_map(|i| i.first_emission_ms)
            .min_by(|a, b| a.total_cmp(b)),
    };
    Ok(Summary {
        instances,
        corpus,
    })
}

impl Summary {
    pub fn to_json(&self) -> CliResult<String> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| data_error(format!("cannot serialize summary: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    /// One CSV row per instance; empty cells for missing metrics.
    pub fn to_csv(&self) -> String {
        let mut csv = String::from(
            "id,tokens,source_frames,flagged,first_emission_ms,al_ca_ms,al_ideal_ms,bleu_sentence\n",
        );
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for i in &self.instances {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{}",
                i.id,
                i.tokens,
                i.source_frames,
                i.flagged,
                opt(i.first_emission_ms),
                opt(i.al_ca_ms),
                opt(i.al_ideal_ms),
                opt(i.bleu_sentence),
            );
        }
        csv
    }
}
