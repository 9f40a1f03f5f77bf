//! Synthetic tackle scenes with exact ground truth.
//!
//! A [`Scene`] serves detections and masks like real providers would, so the
//! pipeline runs on it unchanged.

mod scene;
pub mod suites;

pub use scene::{
    build_scene, export_scenes, DetectionModel, Motion, ObjectSpec, ObjectTrack, Scene, SceneSet, SceneSpec,
    SceneTruth, Shape, DUMMY_ID, PLAYER_ID,
};
