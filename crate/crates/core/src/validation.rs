//! Temporal validation against neighboring frames and geometric motion scoring.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classification::ClassifiedDetection;
use crate::config::{ConsistencyMode, EngineConfig};
use crate::geometry::{iou, size_ratio, BBox, Point};
use crate::interchange::ObjectKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub frame: usize,
    pub bbox: BBox,
    pub confidence: f64,
}

/// An anchor detection with its best match in each validation frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedSet {
    pub anchor: ClassifiedDetection,
    pub matches: Vec<Match>,
    /// Validation frames that fell inside the video.
    pub frames_considered: usize,
}

impl MatchedSet {
    pub fn anchor_frame(&self) -> usize {
        self.anchor.frame()
    }

    pub fn consistency(&self, mode: ConsistencyMode) -> f64 {
        let total: f64 = self.matches.iter().map(|m| m.confidence).sum();
        let denom = match mode {
            ConsistencyMode::MatchedOnly => self.matches.len(),
            ConsistencyMode::AllFrames => self.frames_considered,
        };
        if denom == 0 {
            0.0
        } else {
            total / denom as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionScores {
    pub c_cons: f64,
    pub m_disp: f64,
    pub m_dir: f64,
    pub conf_overall: f64,
}

impl MotionScores {
    pub fn new(c_cons: f64, m_disp: f64, m_dir: f64, cfg: &EngineConfig) -> Self {
        Self {
            c_cons,
            m_disp,
            m_dir,
            conf_overall: overall_confidence(c_cons, m_disp, m_dir, cfg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum ValidationFailure {
    TooFewMatches { found: usize, required: usize },
    LowConsistency { c_cons: f64, required: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(rename_all = "snake_case")]
pub enum MotionError {
    #[error("no matched detections")]
    NoMatches,
    #[error("no matched detections before the anchor frame")]
    NoPastMatches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOutcome {
    Pass,
    FailDisplacement,
    FailDirection,
}

/// Weighted match confidence from precomputed terms, each clamped to `[0, 1]`.
pub fn match_confidence_terms(iou: f64, center_distance: f64, size_ratio: f64, cfg: &EngineConfig) -> f64 {
    let [w_iou, w_dist, w_size] = cfg.match_weights;
    let iou_term = (iou / cfg.match_iou_norm).clamp(0.0, 1.0);
    let dist_term = (1.0 - center_distance / cfg.match_distance_norm).clamp(0.0, 1.0);
    w_iou * iou_term + w_dist * dist_term + w_size * size_ratio.clamp(0.0, 1.0)
}

pub fn match_confidence(d0: &BBox, dv: &BBox, cfg: &EngineConfig) -> f64 {
    match_confidence_terms(
        iou(d0, dv),
        d0.center().distance(&dv.center()),
        size_ratio(d0, dv),
        cfg,
    )
}

/// Best match per validation frame. `neighbors` holds detections of the
/// anchor's kind keyed by frame.
pub fn match_neighbors(
    anchor: &ClassifiedDetection,
    neighbors: &BTreeMap<usize, Vec<ClassifiedDetection>>,
    frame_count: usize,
    cfg: &EngineConfig,
) -> MatchedSet {
    let t0 = anchor.frame() as i64;
    let mut matches = Vec::new();
    let mut frames_considered = 0;
    for &delta in &cfg.validation_offsets {
        let t = t0 + delta;
        if t < 0 || t >= frame_count as i64 {
            continue;
        }
        frames_considered += 1;
        let best = neighbors
            .get(&(t as usize))
            .into_iter()
            .flatten()
            .filter(|d| d.kind == anchor.kind)
            .map(|d| (match_confidence(anchor.bbox(), d.bbox(), cfg), d))
            .filter(|(c, _)| *c > 0.0)
            .max_by(|(ca, a), (cb, b)| {
                ca.total_cmp(cb)
                    .then(b.score().total_cmp(&a.score()).reverse())
                    .then(crate::classification::canonical_cmp(&b.detection, &a.detection))
            });
        if let Some((confidence, d)) = best {
            matches.push(Match {
                frame: t as usize,
                bbox: *d.bbox(),
                confidence,
            });
        }
    }
    MatchedSet {
        anchor: anchor.clone(),
        matches,
        frames_considered,
    }
}

/// Match an anchor and check the per-kind minimum and the consistency floor.
pub fn validate_candidate(
    anchor: &ClassifiedDetection,
    neighbors: &BTreeMap<usize, Vec<ClassifiedDetection>>,
    frame_count: usize,
    cfg: &EngineConfig,
) -> Result<MatchedSet, ValidationFailure> {
    let set = match_neighbors(anchor, neighbors, frame_count, cfg);
    let required = match anchor.kind {
        ObjectKind::Player => cfg.min_player_matches,
        ObjectKind::Dummy => cfg.min_dummy_matches,
    };
    if set.matches.len() < required {
        return Err(ValidationFailure::TooFewMatches {
            found: set.matches.len(),
            required,
        });
    }
    let c_cons = set.consistency(cfg.consistency_mode);
    if c_cons < cfg.min_consistency {
        return Err(ValidationFailure::LowConsistency {
            c_cons,
            required: cfg.min_consistency,
        });
    }
    Ok(set)
}

/// Mean center displacement from the anchor over the reference distance, capped at 1.
pub fn displacement_score(q: &MatchedSet, cfg: &EngineConfig) -> Result<f64, MotionError> {
    if q.matches.is_empty() {
        return Err(MotionError::NoMatches);
    }
    let c0 = q.anchor.center();
    let mean = q
        .matches
        .iter()
        .map(|m| c0.distance(&m.bbox.center()))
        .sum::<f64>()
        / q.matches.len() as f64;
    Ok((mean / cfg.displacement_reference).min(1.0))
}

/// Cosine between the recent motion and the direction to the dummy, mapped
/// to `[0, 1]`. A zero-length vector on either side gives the neutral 0.5.
pub fn directional_score(q: &MatchedSet, dummy_center: Point) -> Result<f64, MotionError> {
    let t0 = q.anchor_frame();
    let past: Vec<Point> = q
        .matches
        .iter()
        .filter(|m| m.frame < t0)
        .map(|m| m.bbox.center())
        .collect();
    if past.is_empty() {
        return Err(MotionError::NoPastMatches);
    }
    let n = past.len() as f64;
    let mean_past = Point::new(
        past.iter().map(|p| p.x).sum::<f64>() / n,
        past.iter().map(|p| p.y).sum::<f64>() / n,
    );
    let c0 = q.anchor.center();
    Ok(direction_between(mean_past, c0, dummy_center))
}

pub(crate) fn direction_between(from: Point, at: Point, target: Point) -> f64 {
    let (mx, my) = (at.x - from.x, at.y - from.y);
    let (tx, ty) = (target.x - at.x, target.y - at.y);
    let (nm, nt) = (mx.hypot(my), tx.hypot(ty));
    if nm == 0.0 || nt == 0.0 {
        return 0.5;
    }
    let cos = ((mx * tx + my * ty) / (nm * nt)).clamp(-1.0, 1.0);
    (cos + 1.0) / 2.0
}

/// Strict less-than on both thresholds: values equal to a threshold pass.
pub fn gate(m_disp: f64, m_dir: f64, cfg: &EngineConfig) -> GateOutcome {
    if m_disp < cfg.min_displacement {
        GateOutcome::FailDisplacement
    } else if m_dir < cfg.min_direction {
        GateOutcome::FailDirection
    } else {
        GateOutcome::Pass
    }
}

pub fn overall_confidence(c_cons: f64, m_disp: f64, m_dir: f64, cfg: &EngineConfig) -> f64 {
    let [a, b, c] = cfg.overall_weights;
    a * c_cons + b * m_disp + c * m_dir
}
