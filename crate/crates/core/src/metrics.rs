//! Latency and quality metrics over simultaneous translation runs.
//!
//! Average Lagging measures how far emissions trail an ideal
//! translator that keeps pace with the source: with emission times
//! `d(y_i)`, source length `|X|` tokens of `T` ms each, and reference
//! length `|Y*|`,
//!
//! ```text
//! AL = (1/tau) * sum_{i=1..tau} [ d(y_i) - (|X|/|Y*|) * T * (i-1) ]
//! ```
//!
//! where `tau` is the index of the first token emitted at or after the
//! moment the whole source has been heard. If no token qualifies, the
//! instance is flagged and `tau` falls back to the hypothesis length.
//!
//! BLEU is standard 4-gram precision with clipping and the brevity
//! penalty, over whitespace tokens. Sentence scores offer exponential
//! smoothing (each zero-count order's numerator is halved again:
//! 1/2, 1/4, ...) and skip orders longer than the hypothesis; corpus
//! scores pool clipped counts across pairs and never smooth.

use crate::error::{CoreError, CoreResult};
use std::collections::HashMap;

/// Inputs to Average Lagging for one instance.
#[derive(Debug, Clone, Copy)]
pub struct LatencyInput<'a> {
    /// Emission time of each hypothesis token, ms, non-decreasing.
    pub emissions_ms: &'a [f64],
    /// Source length in tokens (pre-subsampling frames), `|X|`.
    pub source_tokens: usize,
    /// Duration of one source token, ms, `T`.
    pub frame_ms: f64,
    /// Reference length in tokens, `|Y*|`.
    pub reference_len: usize,
}

/// Average Lagging plus the cutoff diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlResult {
    pub al_ms: f64,
    /// Index (1-based) of the first token emitted at or after source
    /// end, or the hypothesis length when none was.
    pub tau: usize,
    /// True when no token was emitted at or after source end.
    pub flagged: bool,
}

/// Average Lagging over one instance's emission times.
pub fn average_lagging(input: &LatencyInput) -> CoreResult<AlResult> {
    if input.emissions_ms.is_empty() {
        return Err(CoreError::InvalidMetricInput(
            "no emissions: Average Lagging needs at least one token".into(),
        ));
    }
    if input.source_tokens == 0 || input.reference_len == 0 {
        return Err(CoreError::InvalidMetricInput(
            "source and reference lengths must be >= 1".into(),
        ));
    }
    if !input.frame_ms.is_finite() || input.frame_ms <= 0.0 {
        return Err(CoreError::InvalidMetricInput(
            "frame_ms must be positive and finite".into(),
        ));
    }
    if input.emissions_ms.iter().any(|d| !d.is_finite()) {
        return Err(CoreError::InvalidMetricInput(
            "emission times must be finite".into(),
        ));
    }
    if input.emissions_ms.windows(2).any(|w| w[1] < w[0]) {
        return Err(CoreError::InvalidMetricInput(
            "emission times must be non-decreasing".into(),
        ));
    }

    let source_ms = input.source_tokens as f64 * input.frame_ms;
    let (tau, flagged) = match input.emissions_ms.iter().position(|&d| d >= source_ms) {
        Some(i) => (i + 1, false),
        None => (input.emissions_ms.len(), true),
    };
    let rate = input.source_tokens as f64 / input.reference_len as f64 * input.frame_ms;
    let sum: f64 = input.emissions_ms[..tau]
        .iter()
        .enumerate()
        .map(|(i, &d)| d - rate * i as f64)
        .sum();
    Ok(AlResult {
        al_ms: sum / tau as f64,
        tau,
        flagged,
    })
}

/// Sentence-level smoothing choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// No smoothing: any zero-count order zeroes the score.
    None,
    /// Exponential: the k-th zero-count order gets numerator 1/2^k.
    Exp,
}

impl std::str::FromStr for Smoothing {
    type Err = CoreError;

    fn from_str(s: &str) -> CoreResult<Self> {
        match s {
            "none" => Ok(Smoothing::None),
            "exp" => Ok(Smoothing::Exp),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown smoothing {other:?}; expected none or exp"
            ))),
        }
    }
}

const MAX_ORDER: usize = 4;

fn ngram_counts<'a>(tokens: &[&'a str], n: usize) -> HashMap<Vec<&'a str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and total hypothesis n-grams for one order.
fn clipped_matches(hyp: &[&str], reference: &[&str], n: usize) -> (usize, usize) {
    let total = hyp.len().saturating_sub(n - 1);
    if total == 0 {
        return (0, 0);
    }
    let ref_counts = ngram_counts(reference, n);
    let hyp_counts = ngram_counts(hyp, n);
    let matches = hyp_counts
        .iter()
        .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    (matches, total)
}

fn brevity_penalty(hyp_len: usize, ref_len: usize) -> f64 {
    if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    }
}

fn score_from_counts(
    matches: &[usize],
    totals: &[usize],
    hyp_len: usize,
    ref_len: usize,
    smoothing: Smoothing,
) -> f64 {
    // Effective order: ignore orders with no hypothesis n-grams at all
    // (hypotheses shorter than the order).
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    let mut smooth = 1.0f64;
    for (&m, &t) in matches.iter().zip(totals) {
        if t == 0 {
            continue;
        }
        orders += 1;
        let precision = if m > 0 {
            m as f64 / t as f64
        } else {
            match smoothing {
                Smoothing::None => return 0.0,
                Smoothing::Exp => {
                    smooth *= 2.0;
                    1.0 / (smooth * t as f64)
                }
            }
        };
        log_sum += precision.ln();
    }
    if orders == 0 {
        return 0.0;
    }
    100.0 * brevity_penalty(hyp_len, ref_len) * (log_sum / orders as f64).exp()
}

/// Sentence BLEU over whitespace tokens. An empty hypothesis scores 0;
/// an empty reference is an error.
pub fn sentence_bleu(hypothesis: &str, reference: &str, smoothing: Smoothing) -> CoreResult<f64> {
    let hyp: Vec<&str> = hypothesis.split_whitespace().collect();
    let reference: Vec<&str> = reference.split_whitespace().collect();
    if reference.is_empty() {
        return Err(CoreError::InvalidMetricInput(
            "reference must be non-empty".into(),
        ));
    }
    if hyp.is_empty() {
        return Ok(0.0);
    }
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    for n in 1..=MAX_ORDER {
        let (m, t) = clipped_matches(&hyp, &reference, n);
        matches[n - 1] = m;
        totals[n - 1] = t;
    }
    Ok(score_from_counts(
        &matches,
        &totals,
        hyp.len(),
        reference.len(),
        smoothing,
    ))
}

/// Corpus BLEU: clipped counts pooled across pairs, no smoothing.
pub fn corpus_bleu(pairs: &[(&str, &str)]) -> CoreResult<f64> {
    if pairs.is_empty() {
        return Err(CoreError::InvalidMetricInput(
            "corpus BLEU needs at least one pair".into(),
        ));
    }
    let mut matches = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;
    for (hypothesis, reference) in pairs {
        let hyp: Vec<&str> = hypothesis.split_whitespace().collect();
        let reference: Vec<&str> = reference.split_whitespace().collect();
        if reference.is_empty() {
            return Err(CoreError::InvalidMetricInput(
                "every reference must be non-empty".into(),
            ));
        }
        hyp_len += hyp.len();
        ref_len += reference.len();
        for n in 1..=MAX_ORDER {
            let (m, t) = clipped_matches(&hyp, &reference, n);
            matches[n - 1] += m;
            totals[n - 1] += t;
        }
    }
    if hyp_len == 0 {
        return Ok(0.0);
    }
    Ok(score_from_counts(
        &matches,
        &totals,
        hyp_len,
        ref_len,
        Smoothing::None,
    ))
}
