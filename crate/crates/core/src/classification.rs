//! Player/dummy assignment of raw detections, dummy selection and player
//! shortlisting.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::geometry::{BBox, Point};
use crate::interchange::{DetectionRecord, ObjectKind, VideoMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedDetection {
    pub detection: DetectionRecord,
    pub kind: ObjectKind,
}

impl ClassifiedDetection {
    pub fn bbox(&self) -> &BBox {
        &self.detection.bbox
    }

    pub fn center(&self) -> Point {
        self.detection.bbox.center()
    }

    pub fn score(&self) -> f64 {
        self.detection.score
    }

    pub fn frame(&self) -> usize {
        self.detection.frame
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    HorizontalDummy,
    TooSmall,
    Edge,
    NoKeyword,
}

fn words(phrase: &str) -> impl Iterator<Item = &str> {
    phrase
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
}

fn phrase_has_dummy_keyword(phrase: &str, cfg: &EngineConfig) -> bool {
    words(phrase).any(|w| cfg.is_dummy_keyword(w))
}

fn phrase_has_player_keyword(phrase: &str, cfg: &EngineConfig) -> bool {
    words(phrase).any(|w| cfg.is_player_keyword(w))
}

/// True when the box center sits in the left/right margins or the top band.
pub fn edge_positioned(bbox: &BBox, meta: &VideoMeta, cfg: &EngineConfig) -> bool {
    let c = bbox.center();
    let (w, h) = (meta.width as f64, meta.height as f64);
    c.x < cfg.edge_margin_x * w || c.x > (1.0 - cfg.edge_margin_x) * w || c.y < cfg.edge_margin_top * h
}

/// Full classification with the area and edge filters on players.
///
/// The dummy branch is tried first, so a phrase carrying both dummy and
/// player keywords lands on the dummy side.
pub fn classify_detection(
    d: &DetectionRecord,
    meta: &VideoMeta,
    cfg: &EngineConfig,
) -> Result<ClassifiedDetection, Rejection> {
    let ar = d.bbox.aspect_ratio();
    if ar > cfg.dummy_aspect_ratio || phrase_has_dummy_keyword(&d.phrase, cfg) {
        if ar < cfg.horizontal_dummy_floor {
            return Err(Rejection::HorizontalDummy);
        }
        return Ok(ClassifiedDetection {
            detection: d.clone(),
            kind: ObjectKind::Dummy,
        });
    }
    if !phrase_has_player_keyword(&d.phrase, cfg) {
        return Err(Rejection::NoKeyword);
    }
    let min_area = cfg.min_player_area_fraction * meta.height as f64 * meta.width as f64;
    if d.bbox.area() <= min_area {
        return Err(Rejection::TooSmall);
    }
    if edge_positioned(&d.bbox, meta, cfg) {
        return Err(Rejection::Edge);
    }
    Ok(ClassifiedDetection {
        detection: d.clone(),
        kind: ObjectKind::Player,
    })
}

/// Kind assignment without the player area/edge filters, used when
/// re-detecting objects near known reference boxes.
pub fn detection_kind(d: &DetectionRecord, cfg: &EngineConfig) -> Option<ObjectKind> {
    let ar = d.bbox.aspect_ratio();
    if ar > cfg.dummy_aspect_ratio || phrase_has_dummy_keyword(&d.phrase, cfg) {
        (ar >= cfg.horizontal_dummy_floor).then_some(ObjectKind::Dummy)
    } else if phrase_has_player_keyword(&d.phrase, cfg) {
        Some(ObjectKind::Player)
    } else {
        None
    }
}

/// Classify a batch, keeping accepted detections only.
pub fn classify_all(
    detections: &[DetectionRecord],
    meta: &VideoMeta,
    cfg: &EngineConfig,
) -> Vec<ClassifiedDetection> {
    detections
        .iter()
        .filter_map(|d| classify_detection(d, meta, cfg).ok())
        .collect()
}

/// Distance from the image center over half the image diagonal, clamped to 1.
pub fn normalized_center_distance(bbox: &BBox, meta: &VideoMeta) -> f64 {
    let (w, h) = (meta.width as f64, meta.height as f64);
    let image_center = Point::new(w / 2.0, h / 2.0);
    let half_diag = 0.5 * w.hypot(h);
    (bbox.center().distance(&image_center) / half_diag).min(1.0)
}

/// Weighted dummy score over confidence, centrality and verticality.
pub fn dummy_selection_score(d: &ClassifiedDetection, meta: &VideoMeta, cfg: &EngineConfig) -> f64 {
    let [w_score, w_center, w_vertical] = cfg.dummy_score_weights;
    let dist = normalized_center_distance(d.bbox(), meta);
    let vertical = (d.bbox().aspect_ratio() / cfg.dummy_aspect_cap).min(1.0);
    w_score * d.score() + w_center * (1.0 - dist) + w_vertical * vertical
}

/// Total order on detections that does not depend on input position.
pub(crate) fn canonical_cmp(a: &DetectionRecord, b: &DetectionRecord) -> Ordering {
    a.frame
        .cmp(&b.frame)
        .then(a.bbox.x1().total_cmp(&b.bbox.x1()))
        .then(a.bbox.y1().total_cmp(&b.bbox.y1()))
        .then(a.bbox.x2().total_cmp(&b.bbox.x2()))
        .then(a.bbox.y2().total_cmp(&b.bbox.y2()))
        .then(b.score.total_cmp(&a.score))
        .then(a.phrase.cmp(&b.phrase))
        .then(a.prompt_level.cmp(&b.prompt_level))
        .then(a.threshold_tier.cmp(&b.threshold_tier))
        .then(a.video_id.cmp(&b.video_id))
}

/// Pick the best dummy. Ties go to the higher raw score, then the earlier
/// frame, then the canonical record order.
pub fn select_dummy(
    dummies: &[ClassifiedDetection],
    meta: &VideoMeta,
    cfg: &EngineConfig,
) -> Option<ClassifiedDetection> {
    dummies
        .iter()
        .map(|d| (dummy_selection_score(d, meta, cfg), d))
        .min_by(|(sa, a), (sb, b)| {
            sb.total_cmp(sa)
                .then(b.score().total_cmp(&a.score()))
                .then(a.frame().cmp(&b.frame()))
                .then(canonical_cmp(&a.detection, &b.detection))
        })
        .map(|(_, d)| d.clone())
}

/// The nearest players to the dummy center, closest first; ties go to the
/// higher score.
pub fn select_player_candidates(
    players: &[ClassifiedDetection],
    dummy: &ClassifiedDetection,
    cfg: &EngineConfig,
) -> Vec<ClassifiedDetection> {
    let target = dummy.center();
    let mut ranked: Vec<(f64, &ClassifiedDetection)> = players
        .iter()
        .map(|p| (p.center().distance(&target), p))
        .collect();
    ranked.sort_by(|(da, a), (db, b)| {
        da.total_cmp(db)
            .then(b.score().total_cmp(&a.score()))
            .then(canonical_cmp(&a.detection, &b.detection))
    });
    ranked
        .into_iter()
        .take(cfg.player_candidates)
        .map(|(_, p)| p.clone())
        .collect()
}
