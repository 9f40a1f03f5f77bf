use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::contact::{MaskPair, MaskPropagator, SeedRequest};
use crate::error::{Error, Result};
use crate::geometry::{iou, mask_overlap_count, BBox, BitMask, Point};
use crate::interchange::{
    write_detections, write_mask_tracks, write_meta, write_truth, DetectionRecord, MaskTrackRecord, ObjectKind,
    PromptLevel, Truth, VideoMeta, MAX_THRESHOLD_TIER,
};
use crate::search::{DetectorProvider, Query};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Rect,
    /// Ellipse inscribed in the object's box.
    Ellipse,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Motion {
    #[default]
    Static,
    /// Stand still until `onset`, then head for `target` and stop there.
    Approach {
        target: Point,
        onset: usize,
        speed: f64,
        #[serde(default)]
        speed_noise: f64,
    },
    /// Pace horizontally between `min_x` and `max_x`.
    Lateral { speed: f64, min_x: f64, max_x: f64 },
}

fn all_levels() -> Vec<PromptLevel> {
    PromptLevel::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub width: f64,
    pub height: f64,
    /// Center at frame 0.
    pub start: Point,
    #[serde(default)]
    pub motion: Motion,
    #[serde(default)]
    pub entry: usize,
    /// First frame the object is gone again.
    #[serde(default)]
    pub exit: Option<usize>,
    #[serde(default)]
    pub shape: Shape,
    /// Fixed mean score replacing the position-dependent score model.
    #[serde(default)]
    pub score_base: Option<f64>,
    /// Prompt levels under which the detector reports this object.
    #[serde(default = "all_levels")]
    pub visible_levels: Vec<PromptLevel>,
}

impl ObjectSpec {
    pub fn at(width: f64, height: f64, cx: f64, cy: f64) -> Self {
        Self {
            width,
            height,
            start: Point::new(cx, cy),
            motion: Motion::Static,
            entry: 0,
            exit: None,
            shape: Shape::Rect,
            score_base: None,
            visible_levels: all_levels(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionModel {
    pub p_det: f64,
    /// Standard deviation of each corner coordinate, pixels.
    pub box_jitter: f64,
    pub score_base: f64,
    /// Penalty per unit of normalized distance from the image center.
    pub distance_penalty: f64,
    /// Penalty per unit of missing size relative to `size_reference`.
    pub size_penalty: f64,
    /// Box area, as a fraction of the frame, that earns no size penalty.
    pub size_reference: f64,
    pub score_noise: f64,
    /// Player phrase for the gear, no-gear and generic levels.
    pub player_phrases: [String; 3],
    pub dummy_phrase: String,
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self {
            p_det: 1.0,
            box_jitter: 0.0,
            score_base: 0.75,
            distance_penalty: 0.2,
            size_penalty: 0.1,
            size_reference: 0.02,
            score_noise: 0.0,
            player_phrases: ["football player".into(), "player".into(), "person".into()],
            dummy_phrase: "tackle dummy".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub video_id: String,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
    pub frame_count: usize,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default)]
    pub seed: u64,
    pub dummy: ObjectSpec,
    pub player: ObjectSpec,
    #[serde(default)]
    pub distractors: Vec<ObjectSpec>,
    /// Maximum per-frame camera offset in whole pixels.
    #[serde(default)]
    pub camera_jitter: u32,
    #[serde(default)]
    pub detection: DetectionModel,
}

fn default_width() -> u32 {
    1280
}

fn default_height() -> u32 {
    720
}

fn default_fps() -> f64 {
    30.0
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| Err(Error::invalid(format!("{}.{field}", self.video_id), reason));
        if self.video_id.is_empty() {
            return Err(Error::invalid("video_id", "must not be empty"));
        }
        if self.frame_count == 0 {
            return bad("frame_count", "must be at least 1");
        }
        if self.width == 0 || self.height == 0 {
            return bad("width/height", "must be at least 1");
        }
        let d = &self.detection;
        if !(0.0..=1.0).contains(&d.p_det) {
            return bad("detection.p_det", "must lie in [0, 1]");
        }
        if d.box_jitter < 0.0 || d.score_noise < 0.0 || !d.box_jitter.is_finite() || !d.score_noise.is_finite() {
            return bad("detection", "noise levels must be nonnegative");
        }
        if d.size_reference <= 0.0 {
            return bad("detection.size_reference", "must be positive");
        }
        for o in self.objects() {
            if !(o.width >= 1.0 && o.height >= 1.0) {
                return bad("object", "width and height must be at least 1");
            }
            match o.motion {
                Motion::Approach { speed, speed_noise, .. } if speed < 0.0 || speed_noise < 0.0 => {
                    return bad("motion", "speed and its noise must be nonnegative");
                }
                Motion::Lateral { min_x, max_x, .. } if min_x > max_x => {
                    return bad("motion", "min_x exceeds max_x");
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn objects(&self) -> impl Iterator<Item = &ObjectSpec> {
        [&self.dummy, &self.player].into_iter().chain(&self.distractors)
    }

    pub fn meta(&self) -> VideoMeta {
        VideoMeta {
            video_id: self.video_id.clone(),
            frame_count: self.frame_count,
            height: self.height,
            width: self.width,
            fps: self.fps,
        }
    }
}

/// One object's image-space box per frame, `None` while off camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTrack {
    pub id: String,
    pub kind: ObjectKind,
    pub shape: Shape,
    pub rects: Vec<Option<BBox>>,
}

impl ObjectTrack {
    pub fn rect(&self, frame: usize) -> Option<BBox> {
        self.rects.get(frame).copied().flatten()
    }

    pub fn mask(&self, frame: usize, height: u32, width: u32) -> BitMask {
        match self.rect(frame) {
            Some(b) => match self.shape {
                Shape::Rect => BitMask::from_box(height, width, &b),
                Shape::Ellipse => BitMask::from_ellipse(height, width, &b),
            },
            None => BitMask::empty(height, width),
        }
    }

    pub fn first_visible(&self) -> Option<usize> {
        self.rects.iter().position(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTruth {
    pub video_id: String,
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
    /// Dummy first, then the tackler, then distractors.
    pub objects: Vec<ObjectTrack>,
    /// First frame with both the player and the dummy on camera.
    pub gt_ffbo: Option<usize>,
    /// First frame where the rasterized player and dummy share a pixel.
    pub gt_fpoc: Option<usize>,
}

pub const DUMMY_ID: &str = "dummy";
pub const PLAYER_ID: &str = "player";

impl SceneTruth {
    pub fn object(&self, id: &str) -> Option<&ObjectTrack> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn dummy(&self) -> &ObjectTrack {
        &self.objects[0]
    }

    pub fn player(&self) -> &ObjectTrack {
        &self.objects[1]
    }

    /// The object whose box at `frame` best overlaps `bbox` (IoU >= 0.5).
    pub fn identify(&self, frame: usize, bbox: &BBox) -> Option<&str> {
        self.objects
            .iter()
            .filter_map(|o| Some((iou(&o.rect(frame)?, bbox), o)))
            .filter(|(v, _)| *v >= 0.5)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, o)| o.id.as_str())
    }

    /// Contact frame from pixel-span arithmetic on the boxes. Agrees with
    /// `gt_fpoc` for rectangular players.
    pub fn rect_contact_frame(&self) -> Option<usize> {
        let (p, d) = (self.player(), self.dummy());
        (0..self.frame_count).find(|&f| {
            let (Some(a), Some(b)) = (p.rect(f), d.rect(f)) else {
                return false;
            };
            let overlap = |(s0, e0): (u32, u32), (s1, e1): (u32, u32)| s0.max(s1) < e0.min(e1);
            overlap(a.pixel_columns(self.width), b.pixel_columns(self.width))
                && overlap(a.pixel_rows(self.height), b.pixel_rows(self.height))
        })
    }

    /// Contact frame by decoding both masks and scanning every pixel.
    pub fn pixel_scan_contact_frame(&self) -> Option<usize> {
        let (p, d) = (self.player(), self.dummy());
        (0..self.frame_count).find(|&f| {
            if p.rect(f).is_none() || d.rect(f).is_none() {
                return false;
            }
            let a = p.mask(f, self.height, self.width).decode();
            let b = d.mask(f, self.height, self.width).decode();
            a.iter().zip(&b).any(|(x, y)| *x && *y)
        })
    }
}

/// A built scene: truth plus precomputed detections.
#[derive(Debug, Clone)]
pub struct Scene {
    pub spec: SceneSpec,
    pub truth: SceneTruth,
    detections: BTreeMap<(usize, PromptLevel), Vec<DetectionRecord>>,
}

struct Mover {
    pos: Point,
    direction: f64,
    arrived: bool,
}

fn step(m: &mut Mover, motion: &Motion, frame: usize, rng: &mut ChaCha8Rng) {
    match *motion {
        Motion::Static => {}
        Motion::Approach {
            target,
            onset,
            speed,
            speed_noise,
        } => {
            if frame <= onset || m.arrived {
                return;
            }
            let noise = if speed_noise > 0.0 {
                Normal::new(0.0, speed_noise).unwrap().sample(rng)
            } else {
                0.0
            };
            let v = (speed + noise).max(0.0);
            let dist = m.pos.distance(&target);
            if dist <= v {
                m.pos = target;
                m.arrived = true;
            } else {
                let k = v / dist;
                m.pos = Point::new(m.pos.x + (target.x - m.pos.x) * k, m.pos.y + (target.y - m.pos.y) * k);
            }
        }
        Motion::Lateral { speed, min_x, max_x } => {
            let mut x = m.pos.x + m.direction * speed;
            if x > max_x {
                x = max_x - (x - max_x);
                m.direction = -1.0;
            } else if x < min_x {
                x = min_x + (min_x - x);
                m.direction = 1.0;
            }
            m.pos.x = x.clamp(min_x, max_x);
        }
    }
}

/// Whole-pixel box around `c`, shifted by the camera and clipped.
fn image_rect(o: &ObjectSpec, c: Point, cam: (i32, i32), w: u32, h: u32) -> Option<BBox> {
    let (bw, bh) = (o.width.round(), o.height.round());
    let x1 = (c.x - bw / 2.0).round() + cam.0 as f64;
    let y1 = (c.y - bh / 2.0).round() + cam.1 as f64;
    let x2 = (x1 + bw).min(w as f64);
    let y2 = (y1 + bh).min(h as f64);
    BBox::new(x1.max(0.0), y1.max(0.0), x2, y2).ok()
}

fn normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    if sd > 0.0 {
        Normal::new(0.0, sd).unwrap().sample(rng)
    } else {
        0.0
    }
}

/// Integrate trajectories, compute truth by scanning, and draw detections.
pub fn build_scene(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h, t) = (spec.width, spec.height, spec.frame_count);
    let specs: Vec<&ObjectSpec> = spec.objects().collect();
    let mut movers: Vec<Mover> = specs
        .iter()
        .map(|o| Mover {
            pos: o.start,
            direction: 1.0,
            arrived: false,
        })
        .collect();
    let mut tracks: Vec<ObjectTrack> = specs
        .iter()
        .enumerate()
        .map(|(i, o)| ObjectTrack {
            id: match i {
                0 => DUMMY_ID.to_string(),
                1 => PLAYER_ID.to_string(),
                n => format!("distractor-{}", n - 2),
            },
            kind: if i == 0 { ObjectKind::Dummy } else { ObjectKind::Player },
            shape: o.shape,
            rects: Vec::with_capacity(t),
        })
        .collect();

    let a = spec.camera_jitter as i32;
    for f in 0..t {
        let cam = if a > 0 {
            (rng.random_range(-a..=a), rng.random_range(-a..=a))
        } else {
            (0, 0)
        };
        for (i, o) in specs.iter().enumerate() {
            step(&mut movers[i], &o.motion, f, &mut rng);
            let on = f >= o.entry && o.exit.is_none_or(|e| f < e);
            let rect = if on { image_rect(o, movers[i].pos, cam, w, h) } else { None };
            tracks[i].rects.push(rect);
        }
    }

    let mut truth = SceneTruth {
        video_id: spec.video_id.clone(),
        width: w,
        height: h,
        frame_count: t,
        objects: tracks,
        gt_ffbo: None,
        gt_fpoc: None,
    };
    let both = |f: usize| truth.player().rect(f).is_some() && truth.dummy().rect(f).is_some();
    let gt_ffbo = (0..t).find(|&f| both(f));
    let gt_fpoc = (0..t).filter(|&f| both(f)).find(|&f| {
        let p = truth.player().mask(f, h, w);
        let d = truth.dummy().mask(f, h, w);
        mask_overlap_count(&p, &d).map(|c| c > 0).unwrap_or(false)
    });
    truth.gt_ffbo = gt_ffbo;
    truth.gt_fpoc = gt_fpoc;

    let detections = draw_detections(spec, &truth, &specs, &mut rng);
    Ok(Scene {
        spec: spec.clone(),
        truth,
        detections,
    })
}

fn draw_detections(
    spec: &SceneSpec,
    truth: &SceneTruth,
    specs: &[&ObjectSpec],
    rng: &mut ChaCha8Rng,
) -> BTreeMap<(usize, PromptLevel), Vec<DetectionRecord>> {
    let m = &spec.detection;
    let (w, h) = (spec.width as f64, spec.height as f64);
    let image_center = Point::new(w / 2.0, h / 2.0);
    let half_diag = 0.5 * w.hypot(h);
    let mut out: BTreeMap<(usize, PromptLevel), Vec<DetectionRecord>> = BTreeMap::new();
    for f in 0..spec.frame_count {
        for (track, o) in truth.objects.iter().zip(specs) {
            let Some(rect) = track.rect(f) else { continue };
            let hit = rng.random::<f64>() < m.p_det;
            let jitter: [f64; 4] = std::array::from_fn(|_| normal(rng, m.box_jitter));
            let score_noise = normal(rng, m.score_noise);
            if !hit {
                continue;
            }
            let (mut x1, mut x2) = (rect.x1() + jitter[0], rect.x2() + jitter[2]);
            let (mut y1, mut y2) = (rect.y1() + jitter[1], rect.y2() + jitter[3]);
            if x2 < x1 {
                std::mem::swap(&mut x1, &mut x2);
            }
            if y2 < y1 {
                std::mem::swap(&mut y1, &mut y2);
            }
            let Some(bbox) = BBox::new(x1, y1, x2.max(x1 + 1.0), y2.max(y1 + 1.0))
                .ok()
                .and_then(|b| b.clip(w, h))
            else {
                continue;
            };
            let mean = o.score_base.unwrap_or_else(|| {
                let dist = (rect.center().distance(&image_center) / half_diag).min(1.0);
                let size = (rect.area() / (m.size_reference * w * h)).min(1.0);
                m.score_base - m.distance_penalty * dist - m.size_penalty * (1.0 - size)
            });
            let score = (mean + score_noise).clamp(0.0, 1.0);
            for &level in &o.visible_levels {
                let phrase = match track.kind {
                    ObjectKind::Dummy => m.dummy_phrase.clone(),
                    ObjectKind::Player => m.player_phrases[level.priority() as usize].clone(),
                };
                out.entry((f, level)).or_default().push(DetectionRecord {
                    video_id: spec.video_id.clone(),
                    frame: f,
                    bbox,
                    score,
                    phrase,
                    prompt_level: level,
                    threshold_tier: 0,
                });
            }
        }
    }
    out
}

impl Scene {
    pub fn meta(&self) -> VideoMeta {
        self.spec.meta()
    }

    /// Every detection, tagged with the strictest default tier it passes.
    pub fn detection_records(&self) -> Vec<DetectionRecord> {
        let tiers = EngineConfig::default().threshold_tiers;
        self.detections
            .values()
            .flatten()
            .map(|d| DetectionRecord {
                threshold_tier: tiers.iter().position(|&t| d.score >= t).unwrap_or(MAX_THRESHOLD_TIER),
                ..d.clone()
            })
            .collect()
    }

    /// Each visible object's mask at every frame it is on camera.
    pub fn mask_records(&self) -> Vec<MaskTrackRecord> {
        let t = &self.truth;
        let mut out = Vec::new();
        for o in &t.objects {
            let Some(seed_frame) = o.first_visible() else { continue };
            let seed_bbox = o.rect(seed_frame).unwrap();
            for f in 0..t.frame_count {
                if o.rect(f).is_none() {
                    continue;
                }
                out.push(MaskTrackRecord {
                    video_id: t.video_id.clone(),
                    track_id: o.id.clone(),
                    object_kind: o.kind,
                    frame: f,
                    mask: o.mask(f, t.height, t.width),
                    seed_frame,
                    seed_bbox,
                });
            }
        }
        out
    }

    fn check_video(&self, video_id: &str) -> Result<()> {
        if video_id != self.spec.video_id {
            return Err(Error::invalid(
                "video_id",
                format!("scene {} cannot serve {video_id}", self.spec.video_id),
            ));
        }
        Ok(())
    }

    fn match_seed(&self, kind: ObjectKind, frame: usize, seed: &BBox) -> Option<&ObjectTrack> {
        self.truth
            .objects
            .iter()
            .filter(|o| o.kind == kind)
            .filter_map(|o| Some((iou(&o.rect(frame)?, seed), o)))
            .filter(|(v, _)| *v >= 0.5)
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, o)| o)
    }
}

impl DetectorProvider for Scene {
    fn query(&self, q: &Query<'_>) -> Result<Vec<DetectionRecord>> {
        self.check_video(q.video_id)?;
        Ok(self
            .detections
            .get(&(q.frame, q.prompt_level))
            .into_iter()
            .flatten()
            .filter(|d| d.score >= q.min_score)
            .map(|d| DetectionRecord {
                threshold_tier: q.threshold_tier,
                ..d.clone()
            })
            .collect())
    }
}

impl MaskPropagator for Scene {
    fn propagate(&self, req: &SeedRequest) -> Result<Vec<MaskPair>> {
        self.check_video(&req.video_id)?;
        let fail = |what: &str| Error::Propagation {
            video_id: req.video_id.clone(),
            message: format!("{what} seed at frame {} matches no object", req.seed_frame),
        };
        let player = self
            .match_seed(ObjectKind::Player, req.seed_frame, &req.seeds.player)
            .ok_or_else(|| fail("player"))?;
        let dummy = self
            .match_seed(ObjectKind::Dummy, req.seed_frame, &req.seeds.dummy)
            .ok_or_else(|| fail("dummy"))?;
        let (h, w) = (self.truth.height, self.truth.width);
        Ok((req.seed_frame..=req.end_frame)
            .map(|f| MaskPair {
                frame: f,
                player: player.mask(f, h, w),
                dummy: dummy.mask(f, h, w),
            })
            .collect())
    }
}

/// Several scenes behind one provider, dispatched by video id.
#[derive(Debug, Clone, Default)]
pub struct SceneSet {
    scenes: Vec<Scene>,
    index: HashMap<String, usize>,
}

impl SceneSet {
    pub fn build(specs: &[SceneSpec]) -> Result<Self> {
        let mut set = Self::default();
        for s in specs {
            if set.index.contains_key(&s.video_id) {
                return Err(Error::invalid("video_id", format!("{} appears twice", s.video_id)));
            }
            set.index.insert(s.video_id.clone(), set.scenes.len());
            set.scenes.push(build_scene(s)?);
        }
        Ok(set)
    }

    pub fn scenes(&self) -> &[Scene] {
        &self.scenes
    }

    pub fn get(&self, video_id: &str) -> Option<&Scene> {
        self.index.get(video_id).map(|&i| &self.scenes[i])
    }

    pub fn metas(&self) -> Vec<VideoMeta> {
        self.scenes.iter().map(Scene::meta).collect()
    }

    /// Labeled contact frames; scenes without contact are left out.
    pub fn truth(&self) -> Truth {
        self.scenes
            .iter()
            .filter_map(|s| Some((s.spec.video_id.clone(), s.truth.gt_fpoc?)))
            .collect()
    }

    fn scene(&self, video_id: &str) -> Result<&Scene> {
        self.get(video_id)
            .ok_or_else(|| Error::invalid("video_id", format!("no scene named {video_id}")))
    }
}

impl DetectorProvider for SceneSet {
    fn query(&self, q: &Query<'_>) -> Result<Vec<DetectionRecord>> {
        self.scene(q.video_id)?.query(q)
    }
}

impl MaskPropagator for SceneSet {
    fn propagate(&self, req: &SeedRequest) -> Result<Vec<MaskPair>> {
        self.scene(&req.video_id)?.propagate(req)
    }
}

/// Write `meta.json`, `dets.jsonl`, `masks.jsonl` and `truth.json` into `dir`.
pub fn export_scenes(set: &SceneSet, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_meta(dir.join("meta.json"), &set.metas())?;
    let dets: Vec<DetectionRecord> = set.scenes.iter().flat_map(Scene::detection_records).collect();
    write_detections(dir.join("dets.jsonl"), &dets)?;
    let masks: Vec<MaskTrackRecord> = set.scenes.iter().flat_map(Scene::mask_records).collect();
    write_mask_tracks(dir.join("masks.jsonl"), &masks)?;
    write_truth(dir.join("truth.json"), &set.truth())
}
