//! Segment plans: which frames a segment reads and which it owns.
//!
//! A plan decomposes a segment's frame window into six contiguous spans,
//! in stream order:
//!
//! - `lplus`  — lookahead budget reallocated to the past side when the
//!              stream tail cannot fill the lookahead window,
//! - `left`   — regular past context,
//! - `cplus`  — stride budget reallocated to the past side when the
//!              stream tail truncates the center window,
//! - `center` — the nominal stride window: the frames whose encoder
//!              outputs the segment owns (possibly truncated at the
//!              stream tail),
//! - `right`  — regular lookahead context,
//! - `rplus`  — past-context budget reallocated to the future side when
//!              the stream head has no past to offer.
//!
//! Only `center` outputs are emitted; every other span is context. The
//! compact notation groups the spans by side: `past+center+future` with
//! `past = |lplus|+|left|+|cplus|` and `future = |right|+|rplus|`.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Half-open frame interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// Construct a span; `start <= end` is required.
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end, "span start must not exceed end");
        Self { start, end }
    }

    /// Empty span anchored at `pos` (keeps adjacent spans contiguous).
    pub fn empty_at(pos: usize) -> Self {
        Self {
            start: pos,
            end: pos,
        }
    }

    /// Number of frames covered.
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    /// Whether the span covers no frames.
    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// One segment's frame decomposition at a particular stream position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentPlan {
    /// 1-based segment index.
    pub index: usize,
    /// Lookahead budget shifted to the past side (stream tail only).
    pub lplus: Span,
    /// Regular past context.
    pub left: Span,
    /// Stride budget shifted to the past side (stream tail only).
    pub cplus: Span,
    /// Nominal stride window; its encoder outputs belong to this segment.
    pub center: Span,
    /// Regular lookahead context.
    pub right: Span,
    /// Past budget shifted to the future side (stream head only).
    pub rplus: Span,
    /// Whether the plan is final: it will never be recomputed.
    pub finalized: bool,
}

impl SegmentPlan {
    /// The six spans in stream order.
    pub fn spans(&self) -> [Span; 6] {
        [
            self.lplus, self.left, self.cplus, self.center, self.right, self.rplus,
        ]
    }

    /// First frame the plan reads.
    pub fn start(&self) -> usize {
        self.lplus.start
    }

    /// One past the last frame the plan reads.
    pub fn end(&self) -> usize {
        self.rplus.end
    }

    /// Total frames read.
    pub fn total_len(&self) -> usize {
        self.end() - self.start()
    }

    /// Frames of past-side context: `|lplus| + |left| + |cplus|`.
    pub fn past_len(&self) -> usize {
        self.lplus.len() + self.left.len() + self.cplus.len()
    }

    /// Frames of future-side context: `|right| + |rplus|`.
    pub fn future_len(&self) -> usize {
        self.right.len() + self.rplus.len()
    }

    /// Compact `past+center+future` notation, e.g. `32+64+32` or `96+32+0`.
    pub fn notation(&self) -> String {
        format!(
            "{}+{}+{}",
            self.past_len(),
            self.center.len(),
            self.future_len()
        )
    }

    /// One-line record used in logs and golden tests.
    pub fn record_line(&self) -> String {
        format!(
            "n={} spans={} final={}",
            self.index,
            self.notation(),
            u8::from(self.finalized)
        )
    }
}

impl fmt::Display for SegmentPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.notation())
    }
}
