//! Training-free localization of the first point of contact between a
//! moving player and a stationary tackle dummy.
//!
//! The engine consumes per-frame grounded detections and propagated masks
//! from pluggable providers ([`DetectorProvider`], [`MaskPropagator`]):
//!
//! 1. [`search`] probes frames under several prompts and score thresholds
//!    and pools player/dummy candidates.
//! 2. [`validation`] checks each candidate against neighboring frames and
//!    scores its motion toward the dummy.
//! 3. [`refinement`] walks back from the anchor to the first frame where both
//!    objects are visible.
//! 4. [`contact`] propagates masks from there and reports the first frame
//!    where they share a pixel.
//!
//! [`pipeline`] ties these together with the ablation variants, and
//! [`simulator`] provides synthetic scenes with exact ground truth.

pub mod classification;
pub mod cli;
pub mod config;
pub mod contact;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod interchange;
pub mod pipeline;
pub mod refinement;
pub mod search;
pub mod simulator;
pub mod validation;

pub use config::EngineConfig;
pub use contact::{EventResult, MaskPropagator, Status};
pub use error::{Error, Result};
pub use geometry::{BBox, BitMask, Point};
pub use pipeline::{run_batch, run_video, Variant};
pub use search::DetectorProvider;
