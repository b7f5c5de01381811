//! Segment layout: the frame-count geometry every other module is built on.
//!
//! A layout fixes five sizes, all in input frames:
//!
//! - `left`: past context attached to each segment,
//! - `center`: the stride — the frames a segment is responsible for,
//! - `right`: lookahead context attached to each segment,
//! - `chunk`: the granularity at which frames arrive,
//! - `subsample`: the encoder's temporal reduction factor.

use crate::error::{CoreError, CoreResult};
use serde::{Deserialize, Serialize};

/// Frame-count geometry of the segmenter.
///
/// Invariants (checked by [`SegmentLayout::new`]):
/// - `center >= 1`, `chunk >= 1`, `subsample >= 1`;
/// - `left`, `center`, `right` are each divisible by `chunk`;
/// - `chunk` is divisible by `subsample`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentLayout {
    /// Past-context length in frames.
    pub left: usize,
    /// Stride (segment responsibility) in frames.
    pub center: usize,
    /// Lookahead-context length in frames.
    pub right: usize,
    /// Arrival granularity in frames.
    pub chunk: usize,
    /// Encoder temporal reduction factor.
    pub subsample: usize,
}

impl SegmentLayout {
    /// Validate and construct a layout.
    pub fn new(
        left: usize,
        center: usize,
        right: usize,
        chunk: usize,
        subsample: usize,
    ) -> CoreResult<Self> {
        if center == 0 {
            return Err(CoreError::InvalidLayout("center must be >= 1".into()));
        }
        if chunk == 0 {
            return Err(CoreError::InvalidLayout("chunk must be >= 1".into()));
        }
        if subsample == 0 {
            return Err(CoreError::InvalidLayout("subsample must be >= 1".into()));
        }
        for (name, v) in [("left", left), ("center", center), ("right", right)] {
            if v % chunk != 0 {
                return Err(CoreError::InvalidLayout(format!(
                    "{name} ({v}) must be divisible by chunk ({chunk})"
                )));
            }
        }
        if chunk % subsample != 0 {
            return Err(CoreError::InvalidLayout(format!(
                "chunk ({chunk}) must be divisible by subsample ({subsample})"
            )));
        }
        Ok(Self {
            left,
            center,
            right,
            chunk,
            subsample,
        })
    }

    /// Default geometry used throughout the test corpus: 32+64+32 with
    /// 32-frame chunks and 4x subsampling.
    pub fn default_layout() -> Self {
        Self::new(32, 64, 32, 32, 4).expect("default layout is valid")
    }

    /// Full window size `s = left + center + right`.
    pub fn segment_len(&self) -> usize {
        self.left + self.center + self.right
    }

    /// First frame of segment `index`'s center region (`index` is 1-based).
    pub fn center_start(&self, index: usize) -> usize {
        debug_assert!(index >= 1, "segment indices are 1-based");
        (index - 1) * self.center
    }

    /// Number of segments whose center region begins strictly before
    /// `frames` — i.e. how many plans a stream of that length produces.
    pub fn segments_for(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            frames.div_ceil(self.center)
        }
    }
}
