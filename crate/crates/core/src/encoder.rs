//! Toy augmented-memory transformer encoder.
//!
//! Feature frames are subsampled by small strided convolutions, then run
//! through transformer layers in which every segment window attends over
//! its own tokens, a per-segment summary query, and a bounded stack of
//! memory banks left behind by earlier segments:
//!
//! - per layer, the summary vector σ is the mean of that layer's token
//!   rows; queries are `[tokens; σ]`, keys/values are
//!   `[banks; tokens; σ]`, all layer-normed before projection (banks are
//!   stored raw and normed by the consuming layer);
//! - attention scores add a clipped relative-position term; bank keys
//!   sit at the clipping horizon;
//! - each layer's new memory bank is σ's attention output (before
//!   residual and feed-forward), so banks summarize the segment as that
//!   layer saw it;
//! - only the stride (center) rows of a window are emitted; context rows
//!   are computed and discarded.
//!
//! [`StreamingEncoder`] drives this incrementally from scheduler steps
//! with a bounded frame buffer and bank stack; [`offline_encode`] runs
//! the identical computation over a whole recorded stream. A finished
//! stream's finalized outputs match offline encoding exactly, because
//! both perform the same encode calls in the same order.

use crate::error::{CoreError, CoreResult};
use crate::layout::SegmentLayout;
use crate::math::{dot, layer_norm, layer_norm_rows, relu_inplace, softmax_inplace, Mat};
use crate::plan::{SegmentPlan, Span};
use crate::scheduler::{offline_plan, Mode, Scheduler, StepOutcome};
use crate::weights::{ConvStage, EncoderWeights};
use std::collections::VecDeque;

/// Result of encoding one segment window.
#[derive(Debug, Clone)]
pub struct SegmentEncoding {
    /// Encoder outputs for the window's center rows: `center_len / f × d`.
    pub rows: Mat,
    /// New memory bank per layer (raw σ attention outputs).
    pub banks: Vec<Vec<f32>>,
}

/// Bounded per-layer stack of memory banks, oldest first.
#[derive(Debug, Clone)]
pub struct BankStack {
    cap: usize,
    layers: Vec<VecDeque<Vec<f32>>>,
}

impl BankStack {
    pub fn new(layers: usize, cap: usize) -> Self {
        Self {
            cap,
            layers: vec![VecDeque::new(); layers],
        }
    }

    /// Append one bank per layer, evicting the oldest beyond capacity.
    pub fn commit(&mut self, banks: Vec<Vec<f32>>) {
        assert_eq!(banks.len(), self.layers.len(), "bank/layer count mismatch");
        if self.cap == 0 {
            return;
        }
        for (slot, bank) in self.layers.iter_mut().zip(banks) {
            slot.push_back(bank);
            if slot.len() > self.cap {
                slot.pop_front();
            }
        }
    }

    /// Banks per layer, oldest first.
    pub fn snapshot(&self) -> Vec<Vec<Vec<f32>>> {
        self.layers
            .iter()
            .map(|dq| dq.iter().cloned().collect())
            .collect()
    }

    /// Banks currently held per layer.
    pub fn per_layer_len(&self) -> usize {
        self.layers.first().map_or(0, VecDeque::len)
    }

    pub fn cap(&self) -> usize {
        self.cap
    }
}

/// Sliding window over the raw frame stream, indexed by absolute frame
/// position.
#[derive(Debug, Clone)]
pub struct FrameBuffer {
    dim: usize,
    start: usize,
    rows: VecDeque<Vec<f32>>,
}

impl FrameBuffer {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            start: 0,
            rows: VecDeque::new(),
        }
    }

    pub fn push_rows(&mut self, frames: &Mat) -> CoreResult<()> {
        if frames.cols() != self.dim {
            return Err(CoreError::Precondition(format!(
                "frame dim {} does not match buffer dim {}",
                frames.cols(),
                self.dim
            )));
        }
        for i in 0..frames.rows() {
            self.rows.push_back(frames.row(i).to_vec());
        }
        Ok(())
    }

    /// Absolute index of the first retained frame.
    pub fn start(&self) -> usize {
        self.start
    }

    /// Absolute index one past the last retained frame.
    pub fn end(&self) -> usize {
        self.start + self.rows.len()
    }

    /// Retained frame count.
    pub fn occupancy(&self) -> usize {
        self.rows.len()
    }

    /// Drop all frames before `new_start`.
    pub fn evict_to(&mut self, new_start: usize) {
        while self.start < new_start && !self.rows.is_empty() {
            self.rows.pop_front();
            self.start += 1;
        }
    }

    /// Copy of the frames in `span` (which must be retained).
    pub fn slice(&self, span: Span) -> CoreResult<Mat> {
        if span.start < self.start || span.end > self.end() {
            return Err(CoreError::Precondition(format!(
                "span {span} outside retained frames [{}, {})",
                self.start,
                self.end()
            )));
        }
        let mut out = Mat::zeros(span.len(), self.dim);
        for (i, pos) in (span.start..span.end).enumerate() {
            out.row_mut(i).copy_from_slice(&self.rows[pos - self.start]);
        }
        Ok(out)
    }
}

fn conv_stage(stage: &ConvStage, input: &Mat) -> Mat {
    let t_in = input.rows();
    let t_out = if stage.stride == 1 {
        t_in
    } else {
        t_in.div_ceil(stage.stride)
    };
    let mut out = Mat::zeros(t_out, stage.out_ch);
    for t in 0..t_out {
        let center = (t * stage.stride) as isize;
        let out_row = out.row_mut(t);
        for (o, slot) in out_row.iter_mut().enumerate() {
            let mut acc = stage.b[o];
            for k in 0..3usize {
                let pos = center + k as isize - 1;
                if pos < 0 || pos >= t_in as isize {
                    continue;
                }
                let in_row = input.row(pos as usize);
                for (i, &x) in in_row.iter().enumerate() {
                    acc += stage.w[(o * stage.in_ch + i) * 3 + k] * x;
                }
            }
            *slot = acc;
        }
    }
    out
}

/// Subsample raw frames (`len × d_in`, `len` a multiple of the factor)
/// to `len / f` model-dimension rows.
pub fn subsample(weights: &EncoderWeights, frames: &Mat) -> CoreResult<Mat> {
    let cfg = &weights.config;
    if frames.rows() == 0 {
        return Err(CoreError::EmptyInput("no frames to subsample".into()));
    }
    if frames.cols() != cfg.d_in {
        return Err(CoreError::Precondition(format!(
            "frame dim {} does not match input dim {}",
            frames.cols(),
            cfg.d_in
        )));
    }
    if frames.rows() % cfg.subsample != 0 {
        return Err(CoreError::Misaligned(format!(
            "frame count {} is not a multiple of the subsample factor {}",
            frames.rows(),
            cfg.subsample
        )));
    }
    let mut x = conv_stage(&weights.conv[0], frames);
    for stage in &weights.conv[1..] {
        relu_inplace(&mut x);
        x = conv_stage(stage, &x);
    }
    debug_assert_eq!(x.rows(), frames.rows() / cfg.subsample);
    Ok(x)
}

/// Encode one segment window.
///
/// `frames` covers the whole window; `center_offset`/`center_len` locate
/// the stride region within it (in frames, multiples of the subsample
/// factor). `banks` holds each layer's visible memory banks, oldest
/// first.
pub fn encode_segment(
    weights: &EncoderWeights,
    frames: &Mat,
    center_offset: usize,
    center_len: usize,
    banks: &[Vec<Vec<f32>>],
) -> CoreResult<SegmentEncoding> {
    let cfg = &weights.config;
    let f = cfg.subsample;
    if banks.len() != cfg.layers {
        return Err(CoreError::Precondition(format!(
            "got banks for {} layers, encoder has {}",
            banks.len(),
            cfg.layers
        )));
    }
    if center_len == 0 || center_offset % f != 0 || center_len % f != 0 {
        return Err(CoreError::Misaligned(format!(
            "center region {center_offset}+{center_len} must be nonempty and aligned to factor {f}"
        )));
    }
    if center_offset + center_len > frames.rows() {
        return Err(CoreError::Precondition(
            "center region exceeds the window".into(),
        ));
    }

    let mut x = subsample(weights, frames)?;
    let t = x.rows();
    let d = cfg.d_model;
    let heads = cfg.heads;
    let dh = cfg.head_dim();
    let clip = cfg.clip as isize;
    let scale = 1.0 / (dh as f32).sqrt();
    let mut new_banks = Vec::with_capacity(cfg.layers);

    for (layer_banks, layer) in banks.iter().zip(&weights.layers) {
        let n_banks = layer_banks.len();
        let sigma = x.mean_row();

        // Queries: tokens then σ; keys/values: banks, tokens, σ.
        // Everything is layer-normed going in; banks were stored raw and
        // are normed here, by the layer that consumes them.
        let mut q_rows: Vec<Vec<f32>> = Vec::with_capacity(t + 1);
        let mut kv_rows: Vec<Vec<f32>> = Vec::with_capacity(n_banks + t + 1);
        for bank in layer_banks {
            if bank.len() != d {
                return Err(CoreError::Precondition(format!(
                    "bank dim {} does not match model dim {d}",
                    bank.len()
                )));
            }
            kv_rows.push(layer_norm(bank, &layer.ln1_gamma, &layer.ln1_beta));
        }
        for i in 0..t {
            let normed = layer_norm(x.row(i), &layer.ln1_gamma, &layer.ln1_beta);
            q_rows.push(normed.clone());
            kv_rows.push(normed);
        }
        let sigma_normed = layer_norm(&sigma, &layer.ln1_gamma, &layer.ln1_beta);
        q_rows.push(sigma_normed.clone());
        kv_rows.push(sigma_normed);

        let q_in = Mat::from_rows(&q_rows);
        let kv_in = Mat::from_rows(&kv_rows);
        let mut q = q_in.matmul(&layer.wq);
        q.add_bias(&layer.bq);
        let mut k = kv_in.matmul(&layer.wk);
        k.add_bias(&layer.bk);
        let mut v = kv_in.matmul(&layer.wv);
        v.add_bias(&layer.bv);

        let n_q = t + 1;
        let n_k = n_banks + t + 1;
        let mut attn = Mat::zeros(n_q, d);
        let mut scores = vec![0.0f32; n_k];
        for head in 0..heads {
            let off = head * dh;
            for qi in 0..n_q {
                let q_row = &q.row(qi)[off..off + dh];
                // Token i sits at position i; σ sits at position t.
                let q_pos = qi as isize;
                for (kj, score) in scores.iter_mut().enumerate() {
                    let rel_idx = if kj < n_banks {
                        // Banks precede the window; pin them to the horizon.
                        0
                    } else {
                        let k_pos = (kj - n_banks) as isize;
                        ((k_pos - q_pos).clamp(-clip, clip) + clip) as usize
                    };
                    let k_row = &k.row(kj)[off..off + dh];
                    let rel_row = layer.rel_k.row(rel_idx);
                    *score = (dot(q_row, k_row) + dot(q_row, rel_row)) * scale;
                }
                softmax_inplace(&mut scores);
                let out_row = &mut attn.row_mut(qi)[off..off + dh];
                for (kj, &w) in scores.iter().enumerate() {
                    let v_row = &v.row(kj)[off..off + dh];
                    for (o, &vv) in out_row.iter_mut().zip(v_row) {
                        *o += w * vv;
                    }
                }
            }
        }
        let mut attn_out = attn.matmul(&layer.wo);
        attn_out.add_bias(&layer.bo);

        // σ's attention output becomes this layer's new memory bank,
        // before residual or feed-forward touch it.
        new_banks.push(attn_out.row(t).to_vec());

        // Token rows: residual, then pre-norm feed-forward.
        let token_attn = attn_out.slice_rows(0, t);
        x.add_assign(&token_attn);
        let normed = layer_norm_rows(&x, &layer.ln2_gamma, &layer.ln2_beta);
        let mut hidden = normed.matmul(&layer.w1);
        hidden.add_bias(&layer.b1);
        relu_inplace(&mut hidden);
        let mut ffn = hidden.matmul(&layer.w2);
        ffn.add_bias(&layer.b2);
        x.add_assign(&ffn);
    }

    let x = layer_norm_rows(&x, &weights.ln_f_gamma, &weights.ln_f_beta);
    let rows = x.slice_rows(center_offset / f, (center_offset + center_len) / f);
    Ok(SegmentEncoding {
        rows,
        banks: new_banks,
    })
}

/// Encoder outputs for one segment at one point in time.
#[derive(Debug, Clone)]
pub struct SegmentOutput {
    pub index: usize,
    /// Frame span the rows cover (the plan's center).
    pub center: Span,
    /// `center.len() / f` rows of model dimension.
    pub rows: Mat,
}

/// What one streaming step produced.
#[derive(Debug, Clone)]
pub struct EncoderStep {
    /// Frames seen so far.
    pub available: usize,
    /// Outputs of segments finalized during this step, in order.
    pub finalized: Vec<SegmentOutput>,
    /// Provisional outputs of trailing segments, in order.
    pub provisional: Vec<SegmentOutput>,
    /// Segment encodes performed during this step.
    pub encodes: usize,
}

/// Incremental encoder: scheduler, bounded frame buffer, bank stack.
#[derive(Debug, Clone)]
pub struct StreamingEncoder {
    weights: EncoderWeights,
    scheduler: Scheduler,
    buffer: FrameBuffer,
    banks: BankStack,
    total_encodes: u64,
}

impl StreamingEncoder {
    pub fn new(weights: EncoderWeights, layout: SegmentLayout, mode: Mode) -> CoreResult<Self> {
        weights.config.validate()?;
        if layout.subsample != weights.config.subsample {
            return Err(CoreError::InvalidConfig(format!(
                "layout subsample {} does not match encoder subsample {}",
                layout.subsample, weights.config.subsample
            )));
        }
        let buffer = FrameBuffer::new(weights.config.d_in);
        let banks = BankStack::new(weights.config.layers, weights.config.banks);
        Ok(Self {
            weights,
            scheduler: Scheduler::new(layout, mode),
            buffer,
            banks,
            total_encodes: 0,
        })
    }

    pub fn layout(&self) -> &SegmentLayout {
        self.scheduler.layout()
    }

    pub fn weights(&self) -> &EncoderWeights {
        &self.weights
    }

    pub fn available(&self) -> usize {
        self.scheduler.available()
    }

    pub fn is_finished(&self) -> bool {
        self.scheduler.is_finished()
    }

    /// Frames currently retained.
    pub fn buffer_occupancy(&self) -> usize {
        self.buffer.occupancy()
    }

    /// Segment encodes performed so far.
    pub fn total_encodes(&self) -> u64 {
        self.total_encodes
    }

    /// Feed one chunk of frames (`chunk × d_in`): newly finalized
    /// segments are encoded against the committed banks and committed;
    /// trailing segments are encoded provisionally against a step-local
    /// overlay that is discarded afterwards.
    pub fn push_chunk(&mut self, frames: &Mat) -> CoreResult<EncoderStep> {
        let chunk = self.scheduler.layout().chunk;
        if frames.rows() != chunk {
            return Err(CoreError::Misaligned(format!(
                "chunk must hold exactly {chunk} frames, got {}",
                frames.rows()
            )));
        }
        self.buffer.push_rows(frames)?;
        let step = self.scheduler.advance()?;
        debug_assert_eq!(self.buffer.end(), step.available);
        let out = self.run_step(step)?;
        let retain_from = out
            .available
            .saturating_sub(self.scheduler.layout().segment_len());
        self.buffer.evict_to(retain_from);
        Ok(out)
    }

    /// Signal end of stream: remaining segments are finalized in their
    /// offline form, encoded, and committed.
    pub fn finish(&mut self) -> CoreResult<EncoderStep> {
        let step = self.scheduler.finish()?;
        self.run_step(step)
    }

    fn run_step(&mut self, step: StepOutcome) -> CoreResult<EncoderStep> {
        let mut finalized = Vec::with_capacity(step.newly_finalized.len());
        for plan in &step.newly_finalized {
            let enc = self.encode_plan(plan, &self.banks.snapshot())?;
            self.banks.commit(enc.banks);
            finalized.push(SegmentOutput {
                index: plan.index,
                center: plan.center,
                rows: enc.rows,
            });
        }
        let mut provisional = Vec::with_capacity(step.trailing.len());
        let mut overlay = self.banks.clone();
        for plan in &step.trailing {
            let enc = self.encode_plan(plan, &overlay.snapshot())?;
            overlay.commit(enc.banks);
            provisional.push(SegmentOutput {
                index: plan.index,
                center: plan.center,
                rows: enc.rows,
            });
        }
        let encodes = finalized.len() + provisional.len();
        self.total_encodes += encodes as u64;
        Ok(EncoderStep {
            available: step.available,
            finalized,
            provisional,
            encodes,
        })
    }

    fn encode_plan(
        &self,
        plan: &SegmentPlan,
        banks: &[Vec<Vec<f32>>],
    ) -> CoreResult<SegmentEncoding> {
        let window = Span::new(plan.start(), plan.end());
        let frames = self.buffer.slice(window)?;
        encode_segment(
            &self.weights,
            &frames,
            plan.center.start - window.start,
            plan.center.len(),
            banks,
        )
    }
}

/// Encode a whole recorded stream at once: plan offline, then encode
/// each segment in order against the same bounded bank stack the
/// streaming encoder uses. Returns the concatenated center rows,
/// `total / f × d`.
pub fn offline_encode(
    weights: &EncoderWeights,
    layout: &SegmentLayout,
    mode: Mode,
    frames: &Mat,
) -> CoreResult<Mat> {
    weights.config.validate()?;
    if layout.subsample != weights.config.subsample {
        return Err(CoreError::InvalidConfig(
            "layout/encoder subsample mismatch".into(),
        ));
    }
    let plans = offline_plan(layout, mode, frames.rows())?;
    let mut banks = BankStack::new(weights.config.layers, weights.config.banks);
    let mut out = Mat::zeros(0, weights.config.d_model);
    for plan in &plans {
        let window = frames.slice_rows(plan.start(), plan.end());
        let enc = encode_segment(
            weights,
            &window,
            plan.center.start - plan.start(),
            plan.center.len(),
            &banks.snapshot(),
        )?;
        banks.commit(enc.banks);
        out = out.vstack(&enc.rows);
    }
    Ok(out)
}
