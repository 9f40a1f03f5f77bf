//! Mask propagation, pixel overlap and the contact frame.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::{iou, mask_overlap_count, BBox, BitMask};
use crate::interchange::{read_mask_tracks, MaskTrackRecord, ObjectKind, VideoMeta};
use crate::refinement::{refine, PairBoxes, PresenceProbe};
use crate::search::Candidate;
use crate::validation::MotionScores;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRequest {
    pub video_id: String,
    pub seed_frame: usize,
    pub seeds: PairBoxes,
    pub end_frame: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskPair {
    pub frame: usize,
    pub player: BitMask,
    pub dummy: BitMask,
}

/// Extends seed boxes into per-frame masks.
///
/// Implementations return one pair for every frame in
/// `[seed_frame, end_frame]`, each mask sized to the video.
pub trait MaskPropagator {
    fn propagate(&self, request: &SeedRequest) -> Result<Vec<MaskPair>>;

    fn concurrent(&self) -> bool {
        true
    }
}

impl<T: MaskPropagator + ?Sized> MaskPropagator for &T {
    fn propagate(&self, request: &SeedRequest) -> Result<Vec<MaskPair>> {
        (**self).propagate(request)
    }

    fn concurrent(&self) -> bool {
        (**self).concurrent()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactOutcome {
    pub start_frame: usize,
    pub t_fpoc: Option<usize>,
    pub overlap_series: Vec<u64>,
}

/// First frame whose overlap reaches `tau`; `overlaps[0]` is `start_frame`.
pub fn find_fpoc(overlaps: &[u64], start_frame: usize, tau: u64) -> Option<usize> {
    overlaps.iter().position(|&c| c >= tau).map(|i| start_frame + i)
}

/// Last frame of the event window, clamped to the last valid index.
pub fn event_window(t_fpoc: usize, frame_count: usize, cfg: &EngineConfig) -> usize {
    (t_fpoc + cfg.post_contact_frames).min(frame_count.saturating_sub(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceptance {
    Accepted,
    ManualReview,
}

/// Review only when both the overall confidence and the direction score are low.
pub fn accept_result(scores: &MotionScores, cfg: &EngineConfig) -> Acceptance {
    if scores.conf_overall < cfg.review_confidence && scores.m_dir < cfg.review_direction {
        Acceptance::ManualReview
    } else {
        Acceptance::Accepted
    }
}

fn check_pairs(pairs: &[MaskPair], request: &SeedRequest, meta: &VideoMeta) -> Result<()> {
    let fail = |message: String| Error::Propagation {
        video_id: meta.video_id.clone(),
        message,
    };
    let expected = request.end_frame - request.seed_frame + 1;
    if pairs.len() != expected {
        return Err(fail(format!("expected {expected} frames, got {}", pairs.len())));
    }
    for (i, p) in pairs.iter().enumerate() {
        if p.frame != request.seed_frame + i {
            return Err(fail(format!("frame {} out of sequence", p.frame)));
        }
        for m in [&p.player, &p.dummy] {
            if (m.height(), m.width()) != (meta.height, meta.width) {
                return Err(fail(format!(
                    "mask at frame {} is {}x{}, video is {}x{}",
                    p.frame,
                    m.height(),
                    m.width(),
                    meta.height,
                    meta.width
                )));
            }
        }
    }
    Ok(())
}

/// Propagate from the seeds and scan overlaps, extending the horizon until
/// contact or the end of the video.
pub fn propagate_contact<M: MaskPropagator + ?Sized>(
    meta: &VideoMeta,
    prop: &M,
    seed_frame: usize,
    seeds: PairBoxes,
    cfg: &EngineConfig,
) -> Result<ContactOutcome> {
    let last = meta.frame_count.saturating_sub(1);
    let mut series: Vec<u64> = Vec::new();
    let mut end = (seed_frame + cfg.propagation_horizon).min(last);
    loop {
        let request = SeedRequest {
            video_id: meta.video_id.clone(),
            seed_frame,
            seeds,
            end_frame: end,
        };
        let pairs = prop.propagate(&request)?;
        check_pairs(&pairs, &request, meta)?;
        for p in &pairs[series.len()..] {
            let count = mask_overlap_count(&p.player, &p.dummy)?;
            series.push(count);
            if count >= cfg.overlap_threshold {
                return Ok(ContactOutcome {
                    start_frame: seed_frame,
                    t_fpoc: Some(p.frame),
                    overlap_series: series,
                });
            }
        }
        if end == last {
            return Ok(ContactOutcome {
                start_frame: seed_frame,
                t_fpoc: None,
                overlap_series: series,
            });
        }
        end = (end + cfg.propagation_horizon).min(last);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verified {
    pub t_ffbo: usize,
    pub t_fpoc: usize,
    pub t_end: usize,
    pub seeds: PairBoxes,
    pub contact_at_seed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum VerifyFailure {
    /// Masks never overlapped; evidence against the candidate.
    NoContact { t_ffbo: usize, frames_checked: usize },
    /// The propagator could not serve the request.
    Propagation { message: String },
}

/// Seed frame and boxes, refine, propagate and look for the contact frame.
/// Without a presence probe the anchor frame and boxes seed the masks.
pub fn verify_candidate<M: MaskPropagator + ?Sized>(
    cand: &Candidate,
    meta: &VideoMeta,
    prop: &M,
    probe: Option<&dyn PresenceProbe>,
    cfg: &EngineConfig,
) -> std::result::Result<Verified, VerifyFailure> {
    let anchor_boxes = PairBoxes {
        player: *cand.player.bbox(),
        dummy: *cand.dummy.bbox(),
    };
    let (t_ffbo, seeds) = match probe {
        Some(p) => {
            let r = refine(p, cand.anchor_frame, anchor_boxes, cfg);
            (r.frame, r.boxes)
        }
        None => (cand.anchor_frame, anchor_boxes),
    };
    let outcome = propagate_contact(meta, prop, t_ffbo, seeds, cfg).map_err(|e| VerifyFailure::Propagation {
        message: e.to_string(),
    })?;
    match outcome.t_fpoc {
        Some(t_fpoc) => Ok(Verified {
            t_ffbo,
            t_fpoc,
            t_end: event_window(t_fpoc, meta.frame_count, cfg),
            seeds,
            contact_at_seed: t_fpoc == t_ffbo,
        }),
        None => Err(VerifyFailure::NoContact {
            t_ffbo,
            frames_checked: outcome.overlap_series.len(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Accepted,
    ManualReview,
    NoCandidates,
}

/// Per-video outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventResult {
    pub video_id: String,
    pub status: Status,
    pub t_ffbo: Option<usize>,
    pub t_fpoc: Option<usize>,
    pub t_end: Option<usize>,
    pub chosen: Option<Candidate>,
    pub scores: Option<MotionScores>,
    pub candidates_tried: usize,
    #[serde(default)]
    pub contact_at_seed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl EventResult {
    pub fn no_candidates(video_id: &str, diagnostics: Vec<String>) -> Self {
        Self {
            video_id: video_id.to_string(),
            status: Status::NoCandidates,
            t_ffbo: None,
            t_fpoc: None,
            t_end: None,
            chosen: None,
            scores: None,
            candidates_tried: 0,
            contact_at_seed: false,
            diagnostics,
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.status == Status::Accepted
    }

    pub fn validate(&self) -> Result<()> {
        let times = [self.t_ffbo, self.t_fpoc, self.t_end];
        match self.status {
            Status::Accepted => {
                let [Some(a), Some(b), Some(c)] = times else {
                    return Err(Error::invalid("t_ffbo/t_fpoc/t_end", "required when accepted"));
                };
                if !(a <= b && b <= c) {
                    return Err(Error::invalid(
                        "t_ffbo/t_fpoc/t_end",
                        format!("{a}, {b}, {c} are out of order"),
                    ));
                }
            }
            _ => {
                if times.iter().any(Option::is_some) {
                    return Err(Error::invalid("t_ffbo/t_fpoc/t_end", "only set when accepted"));
                }
            }
        }
        if self.video_id.is_empty() {
            return Err(Error::invalid("video_id", "must not be empty"));
        }
        Ok(())
    }

    /// Check the window against the video length.
    pub fn validate_against(&self, meta: &VideoMeta) -> Result<()> {
        self.validate()?;
        if let Some(end) = self.t_end {
            if end >= meta.frame_count {
                return Err(Error::invalid("t_end", format!("{end} is past the last frame")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Track {
    kind: ObjectKind,
    seed_frame: usize,
    seed_bbox: BBox,
    frames: BTreeMap<usize, BitMask>,
}

/// Serves precomputed mask tracks from `masks.jsonl`.
#[derive(Debug, Clone, Default)]
pub struct FilePropagator {
    videos: HashMap<String, BTreeMap<String, Track>>,
    dims: HashMap<String, (u32, u32)>,
}

const TRACK_MATCH_IOU: f64 = 0.5;

impl FilePropagator {
    pub fn from_records(records: impl IntoIterator<Item = MaskTrackRecord>) -> Result<Self> {
        let mut out = Self::default();
        for r in records {
            let dims = (r.mask.height(), r.mask.width());
            let known = *out.dims.entry(r.video_id.clone()).or_insert(dims);
            if known != dims {
                return Err(Error::DimensionMismatch { left: known, right: dims });
            }
            let track = out
                .videos
                .entry(r.video_id.clone())
                .or_default()
                .entry(r.track_id.clone())
                .or_insert_with(|| Track {
                    kind: r.object_kind,
                    seed_frame: r.seed_frame,
                    seed_bbox: r.seed_bbox,
                    frames: BTreeMap::new(),
                });
            if track.kind != r.object_kind {
                return Err(Error::invalid(
                    "object_kind",
                    format!("track {} changes kind", r.track_id),
                ));
            }
            track.frames.insert(r.frame, r.mask);
        }
        Ok(out)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let records = read_mask_tracks(path)?.collect::<Result<Vec<_>>>()?;
        Self::from_records(records)
    }

    /// The track of `kind` best matching a seed box: an exact seed match
    /// first, otherwise the track whose mask at `frame` fits the box.
    fn find(&self, video_id: &str, kind: ObjectKind, frame: usize, seed: &BBox) -> Option<&Track> {
        let tracks = self.videos.get(video_id)?;
        let seeded = tracks
            .values()
            .filter(|t| t.kind == kind && t.seed_frame == frame)
            .map(|t| (iou(&t.seed_bbox, seed), t))
            .filter(|(v, _)| *v >= TRACK_MATCH_IOU)
            .max_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((_, t)) = seeded {
            return Some(t);
        }
        tracks
            .values()
            .filter(|t| t.kind == kind)
            .filter_map(|t| {
                let b = t.frames.get(&frame)?.bounding_box()?;
                Some((iou(&b, seed), t))
            })
            .filter(|(v, _)| *v >= TRACK_MATCH_IOU)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, t)| t)
    }
}

impl MaskPropagator for FilePropagator {
    fn propagate(&self, request: &SeedRequest) -> Result<Vec<MaskPair>> {
        let fail = |message: String| Error::Propagation {
            video_id: request.video_id.clone(),
            message,
        };
        let &(h, w) = self
            .dims
            .get(&request.video_id)
            .ok_or_else(|| fail("no mask tracks for this video".into()))?;
        let player = self
            .find(&request.video_id, ObjectKind::Player, request.seed_frame, &request.seeds.player)
            .ok_or_else(|| fail(format!("no player track matches the seed at frame {}", request.seed_frame)))?;
        let dummy = self
            .find(&request.video_id, ObjectKind::Dummy, request.seed_frame, &request.seeds.dummy)
            .ok_or_else(|| fail(format!("no dummy track matches the seed at frame {}", request.seed_frame)))?;
        let empty = BitMask::empty(h, w);
        let at = |t: &Track, f: usize| t.frames.get(&f).cloned().unwrap_or_else(|| empty.clone());
        Ok((request.seed_frame..=request.end_frame)
            .map(|f| MaskPair {
                frame: f,
                player: at(player, f),
                dummy: at(dummy, f),
            })
            .collect())
    }
}
