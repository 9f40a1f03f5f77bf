//! File formats shared by providers, the engine, the simulator and the evaluator.
//!
//! | file           | content                                   |
//! |----------------|-------------------------------------------|
//! | `dets.jsonl`   | one [`DetectionRecord`] per line          |
//! | `masks.jsonl`  | one [`MaskTrackRecord`] per line          |
//! | `meta.json`    | array of [`VideoMeta`]                    |
//! | `config.json`  | one [`EngineConfig`]                      |
//! | `results.json` | array of [`EventResult`]                  |
//! | `truth.json`   | object mapping `video_id` to the contact frame |

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::contact::EventResult;
use crate::error::{Error, Result};
use crate::geometry::{BBox, BitMask};

/// Player prompt specificity, most specific first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptLevel {
    Gear,
    Nogear,
    Generic,
}

impl PromptLevel {
    pub const ALL: [PromptLevel; 3] = [PromptLevel::Gear, PromptLevel::Nogear, PromptLevel::Generic];

    /// Lower is more specific.
    pub fn priority(self) -> u8 {
        self as u8
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PromptLevel::Gear => "gear",
            PromptLevel::Nogear => "nogear",
            PromptLevel::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Player,
    Dummy,
}

/// Highest tier index a record may carry.
pub const MAX_THRESHOLD_TIER: usize = 2;

/// One grounded box proposal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub video_id: String,
    pub frame: usize,
    pub bbox: BBox,
    pub score: f64,
    pub phrase: String,
    pub prompt_level: PromptLevel,
    pub threshold_tier: usize,
}

/// One object's mask at one frame, part of a propagated track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskTrackRecord {
    pub video_id: String,
    pub track_id: String,
    pub object_kind: ObjectKind,
    pub frame: usize,
    pub mask: BitMask,
    pub seed_frame: usize,
    pub seed_bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoMeta {
    pub video_id: String,
    pub frame_count: usize,
    pub height: u32,
    pub width: u32,
    pub fps: f64,
}

/// Ground truth contact frames keyed by video id. Unlabeled videos are absent.
pub type Truth = BTreeMap<String, usize>;

/// Intrinsic invariants checked on every record read from disk.
pub trait Record {
    fn validate(&self) -> Result<()>;
}

impl Record for DetectionRecord {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::invalid(
                "score",
                format!("{} is outside [0, 1]", self.score),
            ));
        }
        if self.threshold_tier > MAX_THRESHOLD_TIER {
            return Err(Error::invalid(
                "threshold_tier",
                format!("{} exceeds {MAX_THRESHOLD_TIER}", self.threshold_tier),
            ));
        }
        if self.video_id.is_empty() {
            return Err(Error::invalid("video_id", "must not be empty"));
        }
        Ok(())
    }
}

impl DetectionRecord {
    /// Checks that need the video's metadata.
    pub fn validate_against(&self, meta: &VideoMeta) -> Result<()> {
        self.validate()?;
        if self.frame >= meta.frame_count {
            return Err(Error::invalid(
                "frame",
                format!(
                    "{} is past the end of {} ({} frames)",
                    self.frame, meta.video_id, meta.frame_count
                ),
            ));
        }
        Ok(())
    }
}

impl Record for MaskTrackRecord {
    fn validate(&self) -> Result<()> {
        if self.track_id.is_empty() {
            return Err(Error::invalid("track_id", "must not be empty"));
        }
        if self.video_id.is_empty() {
            return Err(Error::invalid("video_id", "must not be empty"));
        }
        Ok(())
    }
}

impl Record for VideoMeta {
    fn validate(&self) -> Result<()> {
        if self.frame_count < 1 {
            return Err(Error::invalid("frame_count", "must be at least 1"));
        }
        if self.height < 1 || self.width < 1 {
            return Err(Error::invalid("height/width", "must be at least 1"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::invalid("fps", "must be positive"));
        }
        Ok(())
    }
}

impl Record for EngineConfig {
    fn validate(&self) -> Result<()> {
        EngineConfig::validate(self)
    }
}

impl Record for EventResult {
    fn validate(&self) -> Result<()> {
        EventResult::validate(self)
    }
}

impl<T: Record> Record for Vec<T> {
    fn validate(&self) -> Result<()> {
        self.iter().try_for_each(Record::validate)
    }
}

impl Record for Truth {
    fn validate(&self) -> Result<()> {
        Ok(())
    }
}

/// Streams validated records from a line-delimited JSON file.
pub struct JsonlReader<T> {
    path: PathBuf,
    lines: std::io::Lines<BufReader<File>>,
    line: usize,
    _marker: PhantomData<T>,
}

impl<T: DeserializeOwned + Record> JsonlReader<T> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            path,
            lines: BufReader::new(file).lines(),
            line: 0,
            _marker: PhantomData,
        })
    }

    /// Line number of the most recently read record.
    pub fn line(&self) -> usize {
        self.line
    }
}

impl<T: DeserializeOwned + Record> Iterator for JsonlReader<T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: self.path.clone(),
                line: self.line,
                message,
            };
            let record = serde_json::from_str::<T>(&text)
                .map_err(|e| parse_err(e.to_string()))
                .and_then(|r| r.validate().map(|_| r).map_err(|e| parse_err(e.to_string())));
            return Some(record);
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<'a, T, I>(path: impl AsRef<Path>, records: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let path = path.as_ref();
    let mut out = create(path)?;
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned + Record>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: T = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    value.validate().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    Ok(value)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::io(path, e.into()))?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_detections(path: impl AsRef<Path>) -> Result<JsonlReader<DetectionRecord>> {
    JsonlReader::open(path)
}

pub fn write_detections<'a>(
    path: impl AsRef<Path>,
    records: impl IntoIterator<Item = &'a DetectionRecord>,
) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_mask_tracks(path: impl AsRef<Path>) -> Result<JsonlReader<MaskTrackRecord>> {
    JsonlReader::open(path)
}

pub fn write_mask_tracks<'a>(
    path: impl AsRef<Path>,
    records: impl IntoIterator<Item = &'a MaskTrackRecord>,
) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_meta(path: impl AsRef<Path>) -> Result<Vec<VideoMeta>> {
    read_json(path)
}

pub fn write_meta(path: impl AsRef<Path>, metas: &[VideoMeta]) -> Result<()> {
    write_json(path, metas)
}

pub fn read_config(path: impl AsRef<Path>) -> Result<EngineConfig> {
    read_json(path)
}

pub fn write_config(path: impl AsRef<Path>, config: &EngineConfig) -> Result<()> {
    write_json(path, config)
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<EventResult>> {
    read_json(path)
}

pub fn write_results(path: impl AsRef<Path>, results: &[EventResult]) -> Result<()> {
    write_json(path, results)
}

/// Single-result convenience wrapper; the file still holds an array.
pub fn write_result(result: &EventResult, path: impl AsRef<Path>) -> Result<()> {
    write_json(path, std::slice::from_ref(result))
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<Truth> {
    read_json(path)
}

pub fn write_truth(path: impl AsRef<Path>, truth: &Truth) -> Result<()> {
    write_json(path, truth)
}
