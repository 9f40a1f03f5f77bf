//! Candidate discovery: probe frames, prompt levels and threshold tiers.

use std::cell::RefCell;
use std::collections::HashMap;
use std::path::Path;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::classification::{
    canonical_cmp, classify_all, select_dummy, select_player_candidates, ClassifiedDetection,
};
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::iou;
use crate::interchange::{read_detections, DetectionRecord, ObjectKind, PromptLevel, VideoMeta};
use crate::validation::MotionScores;

/// One detector request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query<'a> {
    pub video_id: &'a str,
    pub frame: usize,
    pub prompt_level: PromptLevel,
    pub threshold_tier: usize,
    /// Box confidence threshold of the tier.
    pub min_score: f64,
}

impl<'a> Query<'a> {
    pub fn new(
        video_id: &'a str,
        frame: usize,
        prompt_level: PromptLevel,
        threshold_tier: usize,
        cfg: &EngineConfig,
    ) -> Self {
        Self {
            video_id,
            frame,
            prompt_level,
            threshold_tier,
            min_score: cfg.threshold_tiers[threshold_tier],
        }
    }
}

/// Source of grounded detections.
///
/// Implementations must be deterministic and return only records with
/// `score >= query.min_score`, tagged with the query's prompt level and tier.
pub trait DetectorProvider {
    fn query(&self, q: &Query<'_>) -> Result<Vec<DetectionRecord>>;

    /// Whether queries from several threads at once are allowed.
    fn concurrent(&self) -> bool {
        true
    }
}

impl<T: DetectorProvider + ?Sized> DetectorProvider for &T {
    fn query(&self, q: &Query<'_>) -> Result<Vec<DetectionRecord>> {
        (**self).query(q)
    }

    fn concurrent(&self) -> bool {
        (**self).concurrent()
    }
}

type CacheKey = (usize, PromptLevel, usize);

/// Memoizes queries for a single video.
pub struct QueryCache<'a, D: ?Sized> {
    inner: &'a D,
    video_id: String,
    entries: RefCell<HashMap<CacheKey, Rc<Vec<DetectionRecord>>>>,
}

impl<'a, D: DetectorProvider + ?Sized> QueryCache<'a, D> {
    pub fn new(inner: &'a D, video_id: &str) -> Self {
        Self {
            inner,
            video_id: video_id.to_string(),
            entries: RefCell::new(HashMap::new()),
        }
    }

    pub fn get(
        &self,
        frame: usize,
        level: PromptLevel,
        tier: usize,
        cfg: &EngineConfig,
    ) -> Result<Rc<Vec<DetectionRecord>>> {
        let key = (frame, level, tier);
        if let Some(hit) = self.entries.borrow().get(&key) {
            return Ok(Rc::clone(hit));
        }
        let q = Query::new(&self.video_id, frame, level, tier, cfg);
        let records = Rc::new(self.inner.query(&q)?);
        self.entries.borrow_mut().insert(key, Rc::clone(&records));
        Ok(records)
    }

    pub fn queries_issued(&self) -> usize {
        self.entries.borrow().len()
    }
}

/// A player/dummy pair found at one anchor frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub player: ClassifiedDetection,
    pub dummy: ClassifiedDetection,
    pub anchor_frame: usize,
    pub prompt_level: PromptLevel,
    pub threshold_tier: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<MotionScores>,
}

impl Candidate {
    pub fn dummy_distance(&self) -> f64 {
        self.player.center().distance(&self.dummy.center())
    }

    pub fn is_duplicate_of(&self, other: &Candidate, cfg: &EngineConfig) -> bool {
        self.anchor_frame == other.anchor_frame
            && iou(self.player.bbox(), other.player.bbox()) > cfg.dedup_iou
            && iou(self.dummy.bbox(), other.dummy.bbox()) > cfg.dedup_iou
    }
}

/// Preference order among candidates: earlier anchor, more specific prompt,
/// stricter tier, then record order.
pub(crate) fn candidate_cmp(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    a.anchor_frame
        .cmp(&b.anchor_frame)
        .then(a.prompt_level.priority().cmp(&b.prompt_level.priority()))
        .then(a.threshold_tier.cmp(&b.threshold_tier))
        .then(canonical_cmp(&a.player.detection, &b.player.detection))
        .then(canonical_cmp(&a.dummy.detection, &b.dummy.detection))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryFailure {
    pub frame: usize,
    pub prompt_level: PromptLevel,
    pub threshold_tier: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub candidates: Vec<Candidate>,
    /// Candidates emitted before deduplication.
    pub raw_count: usize,
    pub failures: Vec<QueryFailure>,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// `round(p * (T - 1))` for each configured position, in configured order.
pub fn base_probe_frames(frame_count: usize, cfg: &EngineConfig) -> Vec<usize> {
    let last = frame_count.saturating_sub(1);
    cfg.probe_positions
        .iter()
        .map(|p| ((p * last as f64).round() as usize).min(last))
        .collect()
}

/// The local window around each base frame, clipped to the video.
pub fn probe_windows(frame_count: usize, cfg: &EngineConfig) -> Vec<Vec<usize>> {
    let last = frame_count.saturating_sub(1) as i64;
    let (w, s) = (cfg.probe_window as i64, cfg.probe_step as i64);
    base_probe_frames(frame_count, cfg)
        .into_iter()
        .map(|b| {
            let b = b as i64;
            let mut frames: Vec<usize> = (-(w / s)..=w / s)
                .map(|k| b + k * s)
                .filter(|f| (0..=last).contains(f))
                .map(|f| f as usize)
                .collect();
            frames.dedup();
            frames
        })
        .collect()
}

/// All probe frames, windows concatenated in position order, first
/// occurrence kept.
pub fn probe_frames(frame_count: usize, cfg: &EngineConfig) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    probe_windows(frame_count, cfg)
        .into_iter()
        .flatten()
        .filter(|f| seen.insert(*f))
        .collect()
}

/// Candidates from a single query: the frame's best dummy paired with its
/// nearest players.
pub fn candidates_at<D: DetectorProvider + ?Sized>(
    meta: &VideoMeta,
    det: &QueryCache<'_, D>,
    frame: usize,
    level: PromptLevel,
    tier: usize,
    cfg: &EngineConfig,
) -> Result<Vec<Candidate>> {
    let records = det.get(frame, level, tier, cfg)?;
    let classified = classify_all(&records, meta, cfg);
    let (dummies, players): (Vec<_>, Vec<_>) = classified
        .into_iter()
        .partition(|d| d.kind == ObjectKind::Dummy);
    let Some(dummy) = select_dummy(&dummies, meta, cfg) else {
        return Ok(Vec::new());
    };
    Ok(select_player_candidates(&players, &dummy, cfg)
        .into_iter()
        .map(|player| Candidate {
            player,
            dummy: dummy.clone(),
            anchor_frame: frame,
            prompt_level: level,
            threshold_tier: tier,
            scores: None,
        })
        .collect())
}

/// Collapse re-detections of the same pair. The result does not depend on
/// the input order.
pub fn dedup_candidates(mut raw: Vec<Candidate>, cfg: &EngineConfig) -> Vec<Candidate> {
    raw.sort_by(candidate_cmp);
    let mut kept: Vec<Candidate> = Vec::with_capacity(raw.len());
    for c in raw {
        let dup = kept
            .iter()
            .rev()
            .take_while(|k| k.anchor_frame == c.anchor_frame)
            .any(|k| c.is_duplicate_of(k, cfg));
        if !dup {
            kept.push(c);
        }
    }
    kept
}

/// Query every probe frame under every active prompt level and tier and
/// pool the deduplicated candidates. Failed queries are recorded and skipped.
pub fn collect_candidates<D: DetectorProvider + ?Sized>(
    meta: &VideoMeta,
    det: &QueryCache<'_, D>,
    cfg: &EngineConfig,
) -> CandidatePool {
    let mut raw = Vec::new();
    let mut failures = Vec::new();
    for window in probe_windows(meta.frame_count, cfg) {
        for &level in cfg.active_prompt_levels() {
            for tier in cfg.active_tiers() {
                let before = raw.len();
                for &frame in &window {
                    match candidates_at(meta, det, frame, level, tier, cfg) {
                        Ok(found) => raw.extend(found),
                        Err(e) => failures.push(QueryFailure {
                            frame,
                            prompt_level: level,
                            threshold_tier: tier,
                            message: e.to_string(),
                        }),
                    }
                }
                if cfg.escalate_on_failure && raw.len() > before {
                    break;
                }
            }
        }
    }
    let raw_count = raw.len();
    CandidatePool {
        candidates: dedup_candidates(raw, cfg),
        raw_count,
        failures,
    }
}

/// Serves precomputed records keyed by video, frame and prompt level.
#[derive(Debug, Clone, Default)]
pub struct FileDetector {
    records: HashMap<(String, usize, PromptLevel), Vec<DetectionRecord>>,
}

impl FileDetector {
    pub fn from_records(records: impl IntoIterator<Item = DetectionRecord>) -> Self {
        let mut map: HashMap<_, Vec<DetectionRecord>> = HashMap::new();
        for r in records {
            map.entry((r.video_id.clone(), r.frame, r.prompt_level))
                .or_default()
                .push(r);
        }
        for list in map.values_mut() {
            list.sort_by(canonical_cmp);
            // the same box listed under several tiers is served once
            list.dedup_by(|b, a| a.bbox == b.bbox && a.phrase == b.phrase && a.score == b.score);
        }
        Self { records: map }
    }

    /// Load `dets.jsonl`, checking each record against its video's metadata.
    pub fn open(path: impl AsRef<Path>, metas: &[VideoMeta]) -> Result<Self> {
        let path = path.as_ref();
        let by_id: HashMap<&str, &VideoMeta> = metas.iter().map(|m| (m.video_id.as_str(), m)).collect();
        let mut reader = read_detections(path)?;
        let mut records = Vec::new();
        while let Some(r) = reader.next() {
            let r = r?;
            if let Some(meta) = by_id.get(r.video_id.as_str()) {
                r.validate_against(meta).map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: reader.line(),
                    message: e.to_string(),
                })?;
            }
            records.push(r);
        }
        Ok(Self::from_records(records))
    }

    pub fn len(&self) -> usize {
        self.records.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl DetectorProvider for FileDetector {
    fn query(&self, q: &Query<'_>) -> Result<Vec<DetectionRecord>> {
        let key = (q.video_id.to_string(), q.frame, q.prompt_level);
        Ok(self
            .records
            .get(&key)
            .into_iter()
            .flatten()
            .filter(|r| r.score >= q.min_score)
            .map(|r| DetectionRecord {
                threshold_tier: q.threshold_tier,
                ..r.clone()
            })
            .collect())
    }
}
