//! Backward refinement from the grounding anchor to the first frame where
//! both objects are visible.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::classification::detection_kind;
use crate::config::EngineConfig;
use crate::geometry::{iou, BBox};
use crate::interchange::{DetectionRecord, ObjectKind, PromptLevel};
use crate::search::{DetectorProvider, QueryCache};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairBoxes {
    pub player: BBox,
    pub dummy: BBox,
}

/// Re-detection of both objects near reference boxes.
pub trait PresenceProbe {
    /// The boxes found at `frame`, or `None` when either object is missing.
    fn locate(&self, frame: usize, refs: &PairBoxes) -> Option<PairBoxes>;

    fn present(&self, frame: usize, refs: &PairBoxes) -> bool {
        self.locate(frame, refs).is_some()
    }
}

/// Presence given as an explicit frame set; reference boxes pass through.
#[derive(Debug, Clone, Default)]
pub struct PresenceSet {
    pub frames: BTreeSet<usize>,
}

impl PresenceSet {
    pub fn new(frames: impl IntoIterator<Item = usize>) -> Self {
        Self {
            frames: frames.into_iter().collect(),
        }
    }
}

impl PresenceProbe for PresenceSet {
    fn locate(&self, frame: usize, refs: &PairBoxes) -> Option<PairBoxes> {
        self.frames.contains(&frame).then_some(*refs)
    }
}

/// The most confident detection of `kind` overlapping `reference` by at
/// least `min_iou`.
pub fn best_near<'a>(
    records: &'a [DetectionRecord],
    kind: ObjectKind,
    reference: &BBox,
    min_iou: f64,
    cfg: &EngineConfig,
) -> Option<&'a DetectionRecord> {
    records
        .iter()
        .filter(|d| detection_kind(d, cfg) == Some(kind))
        .filter(|d| iou(&d.bbox, reference) >= min_iou)
        .max_by(|a, b| {
            a.score
                .total_cmp(&b.score)
                .then(iou(&a.bbox, reference).total_cmp(&iou(&b.bbox, reference)))
                .then(crate::classification::canonical_cmp(b, a))
        })
}

/// Presence backed by detector queries at a fixed prompt level and tier.
pub struct DetectorPresence<'c, 'a, D: ?Sized> {
    pub detector: &'c QueryCache<'a, D>,
    pub prompt_level: PromptLevel,
    pub threshold_tier: usize,
    pub min_iou: f64,
    pub cfg: &'c EngineConfig,
}

impl<D: DetectorProvider + ?Sized> PresenceProbe for DetectorPresence<'_, '_, D> {
    fn locate(&self, frame: usize, refs: &PairBoxes) -> Option<PairBoxes> {
        let records = self
            .detector
            .get(frame, self.prompt_level, self.threshold_tier, self.cfg)
            .ok()?;
        let player = best_near(&records, ObjectKind::Player, &refs.player, self.min_iou, self.cfg)?;
        let dummy = best_near(&records, ObjectKind::Dummy, &refs.dummy, self.min_iou, self.cfg)?;
        Some(PairBoxes {
            player: player.bbox,
            dummy: dummy.bbox,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Refined {
    pub frame: usize,
    /// Boxes located at `frame`.
    pub boxes: PairBoxes,
    pub probe_calls: usize,
}

struct Counting<'p, P: ?Sized> {
    probe: &'p P,
    calls: std::cell::Cell<usize>,
}

impl<P: PresenceProbe + ?Sized> Counting<'_, P> {
    fn locate(&self, frame: usize, refs: &PairBoxes) -> Option<PairBoxes> {
        self.calls.set(self.calls.get() + 1);
        self.probe.locate(frame, refs)
    }
}

fn walk_back<P: PresenceProbe + ?Sized>(
    probe: &Counting<'_, P>,
    t_g: usize,
    refs: PairBoxes,
    cfg: &EngineConfig,
) -> (usize, PairBoxes) {
    let (mut earliest, mut boxes) = (t_g, refs);
    let mut misses = 0;
    let mut frame = t_g;
    while frame > 0 {
        frame -= 1;
        match probe.locate(frame, &boxes) {
            Some(found) => {
                earliest = frame;
                boxes = found;
                misses = 0;
            }
            None => {
                misses += 1;
                if misses > cfg.max_consecutive_misses {
                    break;
                }
            }
        }
    }
    (earliest, boxes)
}

fn ladder<P: PresenceProbe + ?Sized>(
    probe: &Counting<'_, P>,
    t1: usize,
    refs: PairBoxes,
    cfg: &EngineConfig,
) -> (usize, PairBoxes) {
    let (mut boundary, mut boxes) = (t1, refs);
    loop {
        let origin = boundary;
        let mut failed_at = None;
        for (i, &offset) in cfg.refine_offsets.iter().enumerate() {
            let frame = origin.saturating_sub(offset);
            if frame >= boundary {
                // clipped onto a frame already established
                continue;
            }
            match probe.locate(frame, &boxes) {
                Some(found) => {
                    boundary = frame;
                    boxes = found;
                }
                None if i == 0 => return (boundary, boxes),
                None => {
                    failed_at = Some(frame);
                    break;
                }
            }
        }
        if let Some(mut lo) = failed_at {
            let mut hi = boundary;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                match probe.locate(mid, &boxes) {
                    Some(found) => {
                        hi = mid;
                        boxes = found;
                    }
                    None => lo = mid,
                }
            }
            return (hi, boxes);
        }
        if boundary == 0 || boundary == origin || !cfg.restart_ladder {
            return (boundary, boxes);
        }
    }
}

/// Walk backward from `t_g`, stopping once consecutive misses exceed the
/// tolerance, and return the earliest hit.
pub fn phase1_backtrack<P: PresenceProbe + ?Sized>(probe: &P, t_g: usize, refs: PairBoxes, cfg: &EngineConfig) -> usize {
    let counting = Counting {
        probe,
        calls: Default::default(),
    };
    walk_back(&counting, t_g, refs, cfg).0
}

/// Exponential offsets back from `t1`, then binary search inside the first
/// bracket that fails.
pub fn phase2_probe<P: PresenceProbe + ?Sized>(probe: &P, t1: usize, refs: PairBoxes, cfg: &EngineConfig) -> usize {
    let counting = Counting {
        probe,
        calls: Default::default(),
    };
    ladder(&counting, t1, refs, cfg).0
}

/// Both phases, returning the refined frame with the boxes found there.
pub fn refine<P: PresenceProbe + ?Sized>(probe: &P, t_g: usize, refs: PairBoxes, cfg: &EngineConfig) -> Refined {
    let counting = Counting {
        probe,
        calls: Default::default(),
    };
    let (t1, boxes) = walk_back(&counting, t_g, refs, cfg);
    let (frame, boxes) = ladder(&counting, t1, boxes, cfg);
    Refined {
        frame,
        boxes,
        probe_calls: counting.calls.get(),
    }
}

pub fn refine_ffbo<P: PresenceProbe + ?Sized>(probe: &P, t_g: usize, refs: PairBoxes, cfg: &EngineConfig) -> usize {
    refine(probe, t_g, refs, cfg).frame
}
