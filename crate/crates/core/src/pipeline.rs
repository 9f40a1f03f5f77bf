//! Per-video orchestration: search, validate, score, rank, verify.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classification::{classify_all, ClassifiedDetection};
use crate::config::{Components, EngineConfig};
use crate::contact::{accept_result, verify_candidate, Acceptance, EventResult, MaskPropagator, Status, VerifyFailure};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::interchange::{ObjectKind, PromptLevel, VideoMeta};
use crate::refinement::{DetectorPresence, PresenceProbe};
use crate::search::{candidate_cmp, collect_candidates, Candidate, DetectorProvider, QueryCache};
use crate::validation::{
    directional_score, displacement_score, gate, match_neighbors, validate_candidate, GateOutcome, MotionScores,
    ValidationFailure,
};

/// Named component configurations of the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Variant {
    Sole,
    Trace,
    Mars,
    Graze,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Sole, Variant::Trace, Variant::Mars, Variant::Graze];

    pub fn components(self) -> Components {
        let sole = Components {
            multi_prompt_search: false,
            temporal_validation: false,
            motion_scoring: false,
            backward_refinement: false,
            multi_candidate_retry: false,
        };
        match self {
            Variant::Sole => sole,
            Variant::Trace => Components {
                temporal_validation: true,
                backward_refinement: true,
                ..sole
            },
            Variant::Mars => Components {
                motion_scoring: true,
                ..sole
            },
            Variant::Graze => Components::default(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Sole => "SOLE",
            Variant::Trace => "TRACE",
            Variant::Mars => "MARS",
            Variant::Graze => "GRAZE",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Usage(format!("unknown variant {s:?}; expected GRAZE, SOLE, TRACE or MARS")))
    }
}

pub fn apply_ablation(cfg: &EngineConfig, variant: Variant) -> EngineConfig {
    EngineConfig {
        components: variant.components(),
        ..cfg.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRejection {
    pub object: ObjectKind,
    #[serde(flatten)]
    pub failure: ValidationFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum VerificationTrace {
    Contact {
        t_ffbo: usize,
        t_fpoc: usize,
    },
    Rejected {
        #[serde(flatten)]
        failure: VerifyFailure,
    },
}

/// Everything decided about one pooled candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTrace {
    pub anchor_frame: usize,
    pub prompt_level: PromptLevel,
    pub threshold_tier: usize,
    pub player_bbox: BBox,
    pub dummy_bbox: BBox,
    pub dummy_distance: f64,
    pub validation: Option<ValidationRejection>,
    pub c_cons: Option<f64>,
    pub gate: Option<GateOutcome>,
    pub scores: Option<MotionScores>,
    pub notes: Vec<String>,
    /// Position in the ranked list, for candidates that survived.
    pub rank: Option<usize>,
    pub verification: Option<VerificationTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoTrace {
    pub video_id: String,
    pub raw_candidates: usize,
    pub queries: usize,
    pub query_failures: usize,
    pub candidates: Vec<CandidateTrace>,
    /// Indices into `candidates`, in the order they were verified.
    pub verification_order: Vec<usize>,
}

fn neighbors_of<D: DetectorProvider + ?Sized>(
    meta: &VideoMeta,
    cache: &QueryCache<'_, D>,
    cand: &Candidate,
    kind: ObjectKind,
    cfg: &EngineConfig,
) -> BTreeMap<usize, Vec<ClassifiedDetection>> {
    let t0 = cand.anchor_frame as i64;
    cfg.validation_offsets
        .iter()
        .map(|d| t0 + d)
        .filter(|&t| t >= 0 && t < meta.frame_count as i64)
        .filter_map(|t| {
            let records = cache.get(t as usize, cand.prompt_level, cand.threshold_tier, cfg).ok()?;
            let found: Vec<_> = classify_all(&records, meta, cfg)
                .into_iter()
                .filter(|d| d.kind == kind)
                .collect();
            Some((t as usize, found))
        })
        .collect()
}

/// Validation, motion scoring and gating. Returns `None` when the candidate
/// is dropped; the reason is left in the trace.
fn assess<D: DetectorProvider + ?Sized>(
    meta: &VideoMeta,
    cache: &QueryCache<'_, D>,
    cand: &mut Candidate,
    trace: &mut CandidateTrace,
    cfg: &EngineConfig,
) -> Option<()> {
    let comp = cfg.components;
    let mut c_cons = cand.player.score();
    let mut player_set = None;
    if comp.temporal_validation {
        for (kind, anchor) in [(ObjectKind::Player, &cand.player), (ObjectKind::Dummy, &cand.dummy)] {
            let neighbors = neighbors_of(meta, cache, cand, kind, cfg);
            match validate_candidate(anchor, &neighbors, meta.frame_count, cfg) {
                Ok(set) if kind == ObjectKind::Player => {
                    c_cons = set.consistency(cfg.consistency_mode);
                    player_set = Some(set);
                }
                Ok(_) => {}
                Err(failure) => {
                    trace.validation = Some(ValidationRejection { object: kind, failure });
                    return None;
                }
            }
        }
    }
    trace.c_cons = Some(c_cons);
    if !comp.motion_scoring {
        return Some(());
    }
    let set = player_set.unwrap_or_else(|| {
        let neighbors = neighbors_of(meta, cache, cand, ObjectKind::Player, cfg);
        match_neighbors(&cand.player, &neighbors, meta.frame_count, cfg)
    });
    let m_disp = displacement_score(&set, cfg).unwrap_or_else(|e| {
        trace.notes.push(format!("displacement: {e}"));
        0.0
    });
    let m_dir = directional_score(&set, cand.dummy.center()).unwrap_or_else(|e| {
        trace.notes.push(format!("direction neutral: {e}"));
        0.5
    });
    let g = gate(m_disp, m_dir, cfg);
    trace.gate = Some(g);
    let scores = MotionScores::new(c_cons, m_disp, m_dir, cfg);
    trace.scores = Some(scores);
    if g != GateOutcome::Pass {
        return None;
    }
    cand.scores = Some(scores);
    Some(())
}

/// Verification order. With motion scoring: overall confidence, then
/// direction, then the earlier anchor. Without: distance to the dummy.
pub fn ranking_cmp(a: &Candidate, b: &Candidate, comp: &Components) -> Ordering {
    match (comp.motion_scoring, a.scores, b.scores) {
        (true, Some(sa), Some(sb)) => sb
            .conf_overall
            .total_cmp(&sa.conf_overall)
            .then(sb.m_dir.total_cmp(&sa.m_dir))
            .then(a.anchor_frame.cmp(&b.anchor_frame))
            .then(candidate_cmp(a, b)),
        _ => a
            .dummy_distance()
            .total_cmp(&b.dummy_distance())
            .then(a.anchor_frame.cmp(&b.anchor_frame))
            .then(b.player.score().total_cmp(&a.player.score()))
            .then(candidate_cmp(a, b)),
    }
}

pub fn rank_candidates(candidates: &mut [Candidate], comp: &Components) {
    candidates.sort_by(|a, b| ranking_cmp(a, b, comp));
}

pub fn run_video<D, M>(meta: &VideoMeta, det: &D, prop: &M, cfg: &EngineConfig) -> EventResult
where
    D: DetectorProvider + ?Sized,
    M: MaskPropagator + ?Sized,
{
    run_video_traced(meta, det, prop, cfg).0
}

pub fn run_video_traced<D, M>(meta: &VideoMeta, det: &D, prop: &M, cfg: &EngineConfig) -> (EventResult, VideoTrace)
where
    D: DetectorProvider + ?Sized,
    M: MaskPropagator + ?Sized,
{
    let cache = QueryCache::new(det, &meta.video_id);
    let pool = collect_candidates(meta, &cache, cfg);
    let mut diagnostics = Vec::new();
    if let Some(first) = pool.failures.first() {
        diagnostics.push(format!(
            "{} detector queries failed; first at frame {}: {}",
            pool.failures.len(),
            first.frame,
            first.message
        ));
    }
    let mut trace = VideoTrace {
        video_id: meta.video_id.clone(),
        raw_candidates: pool.raw_count,
        queries: 0,
        query_failures: pool.failures.len(),
        candidates: Vec::with_capacity(pool.len()),
        verification_order: Vec::new(),
    };

    let mut survivors = Vec::new();
    for (i, mut cand) in pool.candidates.into_iter().enumerate() {
        let mut ct = CandidateTrace {
            anchor_frame: cand.anchor_frame,
            prompt_level: cand.prompt_level,
            threshold_tier: cand.threshold_tier,
            player_bbox: *cand.player.bbox(),
            dummy_bbox: *cand.dummy.bbox(),
            dummy_distance: cand.dummy_distance(),
            validation: None,
            c_cons: None,
            gate: None,
            scores: None,
            notes: Vec::new(),
            rank: None,
            verification: None,
        };
        if assess(meta, &cache, &mut cand, &mut ct, cfg).is_some() {
            survivors.push((i, cand));
        }
        trace.candidates.push(ct);
    }
    survivors.sort_by(|(_, a), (_, b)| ranking_cmp(a, b, &cfg.components));
    for (r, (i, _)) in survivors.iter().enumerate() {
        trace.candidates[*i].rank = Some(r);
    }

    let limit = if cfg.components.multi_candidate_retry { survivors.len() } else { 1 };
    let mut tried = 0;
    let mut no_contact = 0;
    for (i, cand) in survivors.iter().take(limit) {
        tried += 1;
        trace.verification_order.push(*i);
        let presence = DetectorPresence {
            detector: &cache,
            prompt_level: cand.prompt_level,
            threshold_tier: cand.threshold_tier,
            min_iou: cfg.presence_iou,
            cfg,
        };
        let probe = cfg
            .components
            .backward_refinement
            .then_some(&presence as &dyn PresenceProbe);
        match verify_candidate(cand, meta, prop, probe, cfg) {
            Ok(v) => {
                trace.candidates[*i].verification = Some(VerificationTrace::Contact {
                    t_ffbo: v.t_ffbo,
                    t_fpoc: v.t_fpoc,
                });
                let acceptance = cand
                    .scores
                    .map_or(Acceptance::Accepted, |s| accept_result(&s, cfg));
                let accepted = acceptance == Acceptance::Accepted;
                if v.contact_at_seed {
                    diagnostics.push("contact already present at the seed frame".into());
                }
                trace.queries = cache.queries_issued();
                let result = EventResult {
                    video_id: meta.video_id.clone(),
                    status: if accepted { Status::Accepted } else { Status::ManualReview },
                    t_ffbo: accepted.then_some(v.t_ffbo),
                    t_fpoc: accepted.then_some(v.t_fpoc),
                    t_end: accepted.then_some(v.t_end),
                    chosen: Some(cand.clone()),
                    scores: cand.scores,
                    candidates_tried: tried,
                    contact_at_seed: v.contact_at_seed,
                    diagnostics,
                };
                return (result, trace);
            }
            Err(failure) => {
                match &failure {
                    VerifyFailure::NoContact { .. } => no_contact += 1,
                    VerifyFailure::Propagation { message } => {
                        diagnostics.push(format!("propagation failed at frame {}: {message}", cand.anchor_frame))
                    }
                }
                trace.candidates[*i].verification = Some(VerificationTrace::Rejected { failure });
            }
        }
    }
    trace.queries = cache.queries_issued();

    let mut result = EventResult::no_candidates(&meta.video_id, diagnostics);
    result.candidates_tried = tried;
    if trace.candidates.is_empty() {
        result.diagnostics.push("no player/dummy pair found at any probe frame".into());
    } else if survivors.is_empty() {
        result.diagnostics.push("every candidate failed validation or gating".into());
    } else if no_contact > 0 {
        result.status = Status::ManualReview;
        result.diagnostics.push("no verified candidate produced mask overlap".into());
    }
    (result, trace)
}

fn run_one<D, M>(meta: &VideoMeta, det: &D, prop: &M, cfg: &EngineConfig) -> (EventResult, VideoTrace)
where
    D: DetectorProvider + ?Sized,
    M: MaskPropagator + ?Sized,
{
    let run = std::panic::AssertUnwindSafe(|| run_video_traced(meta, det, prop, cfg));
    std::panic::catch_unwind(run).unwrap_or_else(|_| {
        let result = EventResult::no_candidates(&meta.video_id, vec!["internal error while processing".into()]);
        let trace = VideoTrace {
            video_id: meta.video_id.clone(),
            raw_candidates: 0,
            queries: 0,
            query_failures: 0,
            candidates: Vec::new(),
            verification_order: Vec::new(),
        };
        (result, trace)
    })
}

/// Process videos on `jobs` workers. Output order follows `videos`.
pub fn run_batch_traced<D, M>(
    videos: &[VideoMeta],
    det: &D,
    prop: &M,
    cfg: &EngineConfig,
    jobs: usize,
) -> Result<Vec<(EventResult, VideoTrace)>>
where
    D: DetectorProvider + Sync + ?Sized,
    M: MaskPropagator + Sync + ?Sized,
{
    let serial = jobs <= 1 || !det.concurrent() || !prop.concurrent();
    if serial {
        return Ok(videos.iter().map(|m| run_one(m, det, prop, cfg)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| videos.par_iter().map(|m| run_one(m, det, prop, cfg)).collect()))
}

pub fn run_batch<D, M>(videos: &[VideoMeta], det: &D, prop: &M, cfg: &EngineConfig, jobs: usize) -> Result<Vec<EventResult>>
where
    D: DetectorProvider + Sync + ?Sized,
    M: MaskPropagator + Sync + ?Sized,
{
    Ok(run_batch_traced(videos, det, prop, cfg, jobs)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}
