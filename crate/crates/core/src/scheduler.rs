//! Streaming segment scheduler.
//!
//! Frames arrive in fixed-size chunks; after every chunk the scheduler
//! reports how the stream seen so far decomposes into overlapping
//! segment windows, and which of those windows are final (never to be
//! recomputed).
//!
//! Two planning modes:
//!
//! - [`Mode::Baseline`]: context windows are clipped wherever the stream
//!   has nothing to offer, so windows near the stream head and tail run
//!   short.
//! - [`Mode::Shiftable`]: context budget that one side cannot fill is
//!   reallocated to the other side, keeping every window at full size
//!   whenever the stream holds enough frames anywhere.
//!
//! Finalization is monotonic and in segment order: once a plan is
//! reported final its spans never change, and after the finish signal
//! the full finalized sequence equals what offline planning of the whole
//! stream would have produced.

use crate::error::{CoreError, CoreResult};
use crate::layout::SegmentLayout;
use crate::plan::{SegmentPlan, Span};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Planning mode: clip short windows, or shift budget to keep them full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Baseline,
    Shiftable,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Baseline => write!(f, "baseline"),
            Mode::Shiftable => write!(f, "shiftable"),
        }
    }
}

impl FromStr for Mode {
    type Err = CoreError;

    fn from_str(s: &str) -> CoreResult<Self> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "shiftable" => Ok(Mode::Shiftable),
            other => Err(CoreError::InvalidConfig(format!(
                "unknown mode '{other}' (expected 'baseline' or 'shiftable')"
            ))),
        }
    }
}

/// Plan segment `index` against the first `avail` frames of the stream.
///
/// `index` is 1-based and the segment must have started: `avail` must
/// exceed the segment's center start `(index - 1) * center`.
pub fn plan_at(
    layout: &SegmentLayout,
    mode: Mode,
    index: usize,
    avail: usize,
) -> CoreResult<SegmentPlan> {
    if index == 0 {
        return Err(CoreError::Precondition(
            "segment indices are 1-based".into(),
        ));
    }
    if avail <= layout.center_start(index) {
        return Err(CoreError::Precondition(format!(
            "segment {index} starts at frame {} but only {avail} frames are available",
            layout.center_start(index)
        )));
    }
    Ok(plan_at_unchecked(layout, mode, index, avail))
}

fn plan_at_unchecked(
    layout: &SegmentLayout,
    mode: Mode,
    index: usize,
    avail: usize,
) -> SegmentPlan {
    let (l, c, r) = (layout.left, layout.center, layout.right);
    let b = layout.center_start(index);
    let p = c.min(avail - b);
    let center = Span::new(b, b + p);
    let right = Span::new(center.end, avail.min(center.end + r));
    match mode {
        Mode::Baseline => {
            let left = Span::new(b.saturating_sub(l), b);
            SegmentPlan {
                index,
                lplus: Span::empty_at(left.start),
                left,
                cplus: Span::empty_at(b),
                center,
                right,
                rplus: Span::empty_at(right.end),
                finalized: false,
            }
        }
        Mode::Shiftable if index == 1 => {
            // Stream head: there is no past, so once the lookahead window
            // is full the unused past budget extends it further.
            let rplus = if right.len() == r {
                Span::new(right.end, avail.min(right.end + l))
            } else {
                Span::empty_at(right.end)
            };
            SegmentPlan {
                index,
                lplus: Span::empty_at(0),
                left: Span::empty_at(0),
                cplus: Span::empty_at(0),
                center,
                right,
                rplus,
                finalized: false,
            }
        }
        Mode::Shiftable => {
            // Stream tail: stride budget the center cannot fill, then
            // lookahead budget the right context cannot fill, extend the
            // window into the past instead.
            let cplus = Span::new(b - (c - p), b);
            let left = Span::new(cplus.start.saturating_sub(l), cplus.start);
            let deficit = r - right.len();
            let lplus = Span::new(left.start.saturating_sub(deficit), left.start);
            SegmentPlan {
                index,
                lplus,
                left,
                cplus,
                center,
                right,
                rplus: Span::empty_at(right.end),
                finalized: false,
            }
        }
    }
}

/// The offline (whole-stream) form of segment `index`'s plan.
///
/// Offline planning clips at the stream tail exactly like the baseline;
/// the shiftable mode differs offline only at the stream head, where the
/// first segment still extends its lookahead into the unused past budget.
fn plan_at_offline(layout: &SegmentLayout, mode: Mode, index: usize, total: usize) -> SegmentPlan {
    match mode {
        Mode::Shiftable if index == 1 => plan_at_unchecked(layout, Mode::Shiftable, 1, total),
        _ => plan_at_unchecked(layout, Mode::Baseline, index, total),
    }
}

/// Frames that must be available before segment `index`'s plan is final.
///
/// A plan is final once nothing that arrives later can change it: the
/// center and lookahead windows are full at `index * center + right`
/// frames. The shiftable mode additionally holds every segment until the
/// first full window (`segment_len` frames) exists, which keeps
/// finalization in segment order even when the past context is longer
/// than the stride.
pub fn finalize_deadline(layout: &SegmentLayout, mode: Mode, index: usize) -> usize {
    let raw = index * layout.center + layout.right;
    match mode {
        Mode::Baseline => raw,
        Mode::Shiftable => raw.max(layout.segment_len()),
    }
}

/// Plan an entire recorded stream of `total` frames at once.
///
/// `total` must be a positive multiple of the chunk size, mirroring what
/// a finished live stream can have delivered.
pub fn offline_plan(
    layout: &SegmentLayout,
    mode: Mode,
    total: usize,
) -> CoreResult<Vec<SegmentPlan>> {
    if total == 0 {
        return Err(CoreError::EmptyInput("cannot plan an empty stream".into()));
    }
    if total % layout.chunk != 0 {
        return Err(CoreError::Misaligned(format!(
            "stream length {total} is not a multiple of the chunk size {}",
            layout.chunk
        )));
    }
    Ok((1..=layout.segments_for(total))
        .map(|n| {
            let mut plan = plan_at_offline(layout, mode, n, total);
            plan.finalized = true;
            plan
        })
        .collect())
}

/// What one scheduler step produced.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Frames available after the step.
    pub available: usize,
    /// Plans that became final during the step, in segment order.
    pub newly_finalized: Vec<SegmentPlan>,
    /// Plans still subject to recomputation, in segment order.
    pub trailing: Vec<SegmentPlan>,
}

/// Incremental scheduler over a chunked stream.
#[derive(Debug, Clone)]
pub struct Scheduler {
    layout: SegmentLayout,
    mode: Mode,
    available: usize,
    finalized: Vec<SegmentPlan>,
    finished: bool,
}

impl Scheduler {
    pub fn new(layout: SegmentLayout, mode: Mode) -> Self {
        Self {
            layout,
            mode,
            available: 0,
            finalized: Vec::new(),
            finished: false,
        }
    }

    pub fn layout(&self) -> &SegmentLayout {
        &self.layout
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Frames seen so far.
    pub fn available(&self) -> usize {
        self.available
    }

    /// Whether the finish signal has been received.
    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Receive one chunk of frames.
    pub fn advance(&mut self) -> CoreResult<StepOutcome> {
        self.advance_chunks(1)
    }

    /// Receive `chunks` chunks at once. Equivalent to `chunks` single
    /// advances with only the last outcome's trailing plans observed.
    pub fn advance_chunks(&mut self, chunks: usize) -> CoreResult<StepOutcome> {
        if self.finished {
            return Err(CoreError::Lifecycle(
                "cannot advance a finished stream".into(),
            ));
        }
        self.available += chunks * self.layout.chunk;
        let newly_finalized = self.drain_finalizable();
        Ok(StepOutcome {
            available: self.available,
            newly_finalized,
            trailing: self.trailing(),
        })
    }

    /// Signal end of stream: every remaining trailing plan is recomputed
    /// in its offline form and finalized, in segment order.
    pub fn finish(&mut self) -> CoreResult<StepOutcome> {
        if self.finished {
            return Err(CoreError::Lifecycle("stream already finished".into()));
        }
        self.finished = true;
        let first = self.finalized.len() + 1;
        let last = self.layout.segments_for(self.available);
        let mut newly_finalized = Vec::with_capacity(last.saturating_sub(first - 1));
        for n in first..=last {
            let mut plan = plan_at_offline(&self.layout, self.mode, n, self.available);
            plan.finalized = true;
            self.finalized.push(plan);
            newly_finalized.push(plan);
        }
        Ok(StepOutcome {
            available: self.available,
            newly_finalized,
            trailing: Vec::new(),
        })
    }

    fn drain_finalizable(&mut self) -> Vec<SegmentPlan> {
        let mut newly = Vec::new();
        loop {
            let next = self.finalized.len() + 1;
            if self.layout.center_start(next) >= self.available {
                break;
            }
            if self.available < finalize_deadline(&self.layout, self.mode, next) {
                break;
            }
            let mut plan = plan_at_unchecked(&self.layout, self.mode, next, self.available);
            plan.finalized = true;
            self.finalized.push(plan);
            newly.push(plan);
        }
        newly
    }

    /// Plans already final, in segment order.
    pub fn finalized(&self) -> &[SegmentPlan] {
        &self.finalized
    }

    /// Current plans still subject to recomputation, in segment order.
    pub fn trailing(&self) -> Vec<SegmentPlan> {
        if self.finished {
            return Vec::new();
        }
        let first = self.finalized.len() + 1;
        let last = self.layout.segments_for(self.available);
        (first..=last)
            .map(|n| plan_at_unchecked(&self.layout, self.mode, n, self.available))
            .collect()
    }

    /// The full current plan sequence: finalized plans followed by
    /// trailing plans.
    pub fn plans(&self) -> Vec<SegmentPlan> {
        let mut all = self.finalized.clone();
        all.extend(self.trailing());
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_layout() -> SegmentLayout {
        SegmentLayout::default_layout()
    }

    fn notations(plans: &[SegmentPlan]) -> Vec<String> {
        plans.iter().map(|p| p.notation()).collect()
    }

    fn stream_notations(mode: Mode, chunks: usize) -> Vec<Vec<String>> {
        let mut sched = Scheduler::new(default_layout(), mode);
        (0..chunks)
            .map(|_| {
                sched.advance().unwrap();
                notations(&sched.plans())
            })
            .collect()
    }

    #[test]
    fn shiftable_five_chunk_evolution() {
        let lines = stream_notations(Mode::Shiftable, 5);
        assert_eq!(lines[0], ["0+32+0"]);
        assert_eq!(lines[1], ["0+64+0"]);
        assert_eq!(lines[2], ["0+64+32", "64+32+0"]);
        assert_eq!(lines[3], ["0+64+64", "64+64+0"]);
        assert_eq!(lines[4], ["0+64+64", "32+64+32", "96+32+0"]);
    }

    #[test]
    fn baseline_five_chunk_evolution() {
        let lines = stream_notations(Mode::Baseline, 5);
        assert_eq!(lines[0], ["0+32+0"]);
        assert_eq!(lines[1], ["0+64+0"]);
        assert_eq!(lines[2], ["0+64+32", "32+32+0"]);
        assert_eq!(lines[3], ["0+64+32", "32+64+0"]);
        assert_eq!(lines[4], ["0+64+32", "32+64+32", "32+32+0"]);
    }

    #[test]
    fn shiftable_later_positions() {
        let layout = default_layout();
        let at_192: Vec<String> = (1..=3)
            .map(|n| plan_at(&layout, Mode::Shiftable, n, 192).unwrap().notation())
            .collect();
        assert_eq!(at_192, ["0+64+64", "32+64+32", "64+64+0"]);

        let at_224: Vec<String> = (1..=4)
            .map(|n| plan_at(&layout, Mode::Shiftable, n, 224).unwrap().notation())
            .collect();
        assert_eq!(at_224, ["0+64+64", "32+64+32", "32+64+32", "96+32+0"]);
    }

    #[test]
    fn tail_shift_takes_stride_then_lookahead_budget() {
        // 96+32+0 at 160 frames: the window spans [32, 160) with the
        // truncated center owning only [128, 160).
        let plan = plan_at(&default_layout(), Mode::Shiftable, 3, 160).unwrap();
        assert_eq!(plan.lplus, Span::new(32, 64));
        assert_eq!(plan.left, Span::new(64, 96));
        assert_eq!(plan.cplus, Span::new(96, 128));
        assert_eq!(plan.center, Span::new(128, 160));
        assert!(plan.right.is_empty());
        assert!(plan.rplus.is_empty());
        assert_eq!(plan.total_len(), 128);
    }

    #[test]
    fn offline_plans_match_goldens() {
        let layout = default_layout();
        let base = offline_plan(&layout, Mode::Baseline, 256).unwrap();
        assert_eq!(
            notations(&base),
            ["0+64+32", "32+64+32", "32+64+32", "32+64+0"]
        );
        assert!(base.iter().all(|p| p.finalized));

        let shift = offline_plan(&layout, Mode::Shiftable, 256).unwrap();
        assert_eq!(
            notations(&shift),
            ["0+64+64", "32+64+32", "32+64+32", "32+64+0"]
        );
        assert_eq!(shift[0].rplus, Span::new(96, 128));

        let single = offline_plan(&layout, Mode::Shiftable, 64).unwrap();
        assert_eq!(notations(&single), ["0+64+0"]);
    }

    #[test]
    fn finalization_deadlines() {
        let layout = default_layout();
        // Shiftable: nothing is final until a full window exists.
        let mut sched = Scheduler::new(layout, Mode::Shiftable);
        let step = sched.advance_chunks(3).unwrap(); // 96 frames
        assert!(step.newly_finalized.is_empty());
        let step = sched.advance().unwrap(); // 128 frames
        assert_eq!(notations(&step.newly_finalized), ["0+64+64"]);
        assert!(step.newly_finalized[0].finalized);

        // Baseline: segment 2 is final as soon as its lookahead fills.
        let mut sched = Scheduler::new(layout, Mode::Baseline);
        let step = sched.advance_chunks(5).unwrap(); // 160 frames
        assert_eq!(
            notations(&sched.finalized()),
            ["0+64+32", "32+64+32"]
        );
        assert_eq!(notations(&step.trailing), ["32+32+0"]);
    }

    #[test]
    fn finish_finalizes_trailing_in_offline_form() {
        let mut sched = Scheduler::new(default_layout(), Mode::Shiftable);
        sched.advance_chunks(5).unwrap(); // 160 frames
        assert_eq!(notations(&sched.trailing()), ["96+32+0"]);
        let step = sched.finish().unwrap();
        assert_eq!(notations(&step.newly_finalized), ["32+32+0"]);
        assert!(sched.trailing().is_empty());
        let offline = offline_plan(&default_layout(), Mode::Shiftable, 160).unwrap();
        assert_eq!(sched.plans(), offline);
    }

    #[test]
    fn lifecycle_errors() {
        let mut sched = Scheduler::new(default_layout(), Mode::Baseline);
        sched.advance().unwrap();
        sched.finish().unwrap();
        assert!(matches!(sched.advance(), Err(CoreError::Lifecycle(_))));
        assert!(matches!(sched.finish(), Err(CoreError::Lifecycle(_))));
    }

    #[test]
    fn plan_preconditions() {
        let layout = default_layout();
        assert!(matches!(
            plan_at(&layout, Mode::Baseline, 0, 64),
            Err(CoreError::Precondition(_))
        ));
        assert!(matches!(
            plan_at(&layout, Mode::Baseline, 2, 64),
            Err(CoreError::Precondition(_))
        ));
        assert!(plan_at(&layout, Mode::Baseline, 2, 65).is_ok());
    }

    #[test]
    fn offline_plan_validation() {
        let layout = default_layout();
        assert!(matches!(
            offline_plan(&layout, Mode::Baseline, 0),
            Err(CoreError::EmptyInput(_))
        ));
        assert!(matches!(
            offline_plan(&layout, Mode::Baseline, 100),
            Err(CoreError::Misaligned(_))
        ));
    }

    #[test]
    fn mode_parsing_round_trip() {
        assert_eq!("baseline".parse::<Mode>().unwrap(), Mode::Baseline);
        assert_eq!("shiftable".parse::<Mode>().unwrap(), Mode::Shiftable);
        assert!("fancy".parse::<Mode>().is_err());
        assert_eq!(Mode::Shiftable.to_string(), "shiftable");
    }
}
