//! Seeded scene collections used by the examples and acceptance tests.
//!
//! Every suite shares the same tackle layout: a tall dummy in the upper
//! middle of the frame and a player who stands still, then runs at it from
//! below and stops a few pixels inside it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scene::{DetectionModel, Motion, ObjectSpec, SceneSpec};
use crate::error::{Error, Result};
use crate::geometry::Point;

pub const SUITES: [&str; 4] = ["zero-noise", "noise", "distractor", "crowded"];

/// Layout numbers a suite may need after drawing the base scene.
struct Layout {
    dummy: Point,
    target: Point,
}

fn tackle_scene(rng: &mut ChaCha8Rng, video_id: String, seed: u64) -> (SceneSpec, Layout) {
    let (width, height) = (1280.0, 720.0);
    let frame_count = rng.random_range(150..=300usize);
    let dummy_size = (60.0, 180.0);
    let dummy_c = Point::new(rng.random_range(600.0..=680.0), rng.random_range(175.0..=205.0));
    let (pw, ph) = (rng.random_range(90.0..=100.0_f64).round(), rng.random_range(140.0..=150.0_f64).round());
    let penetration = rng.random_range(6.0..=14.0_f64).round();
    let target = Point::new(dummy_c.x, dummy_c.y + dummy_size.1 / 2.0 + ph / 2.0 - penetration);

    // start below the target, inside the frame
    let angle = rng.random_range(-30.0_f64..=30.0).to_radians();
    let max_down = height - ph / 2.0 - 8.0 - target.y;
    let distance = rng.random_range(200.0..=290.0_f64).min(max_down / angle.cos());
    let start = Point::new(target.x + distance * angle.sin(), target.y + distance * angle.cos());

    // the middle probe window falls inside the run with margin on both sides
    let speed = rng.random_range(4.5..=7.0);
    let run_frames = (distance / speed).floor() as usize;
    let mid = ((frame_count - 1) as f64 * 0.5).round() as usize;
    let into_run = rng.random_range(10..=run_frames.saturating_sub(10).max(10));
    let onset = mid.saturating_sub(into_run);
    let entry = rng.random_range(0..=onset.min(30));

    let dummy = ObjectSpec {
        score_base: Some(0.85),
        ..ObjectSpec::at(dummy_size.0, dummy_size.1, dummy_c.x, dummy_c.y)
    };
    let player = ObjectSpec {
        motion: Motion::Approach {
            target,
            onset,
            speed,
            speed_noise: 0.0,
        },
        entry,
        ..ObjectSpec::at(pw, ph, start.x, start.y)
    };
    let spec = SceneSpec {
        video_id,
        width: width as u32,
        height: height as u32,
        frame_count,
        fps: 30.0,
        seed,
        dummy,
        player,
        distractors: Vec::new(),
        camera_jitter: 0,
        detection: DetectionModel::default(),
    };
    (
        spec,
        Layout {
            dummy: dummy_c,
            target,
        },
    )
}

fn generate(
    name: &str,
    count: usize,
    seed: u64,
    mut adjust: impl FnMut(&mut ChaCha8Rng, &mut SceneSpec, &Layout),
) -> Vec<SceneSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let scene_seed = rng.random::<u64>();
            let (mut spec, layout) = tackle_scene(&mut rng, format!("{name}-{i:04}"), scene_seed);
            adjust(&mut rng, &mut spec, &layout);
            spec
        })
        .collect()
}

/// Perfect detections, no camera motion.
pub fn zero_noise_suite(count: usize, seed: u64) -> Vec<SceneSpec> {
    generate("zero-noise", count, seed, |_, _, _| {})
}

/// Missed detections, box jitter and camera shake.
pub fn noise_suite(count: usize, seed: u64) -> Vec<SceneSpec> {
    generate("noise", count, seed, |_, spec, _| {
        spec.detection.p_det = 0.85;
        spec.detection.box_jitter = 3.0;
        spec.detection.score_noise = 0.02;
        spec.camera_jitter = 2;
    })
}

/// A confident, motionless bystander stands right beside the dummy, closer
/// to it than the tackler ever gets.
pub fn distractor_suite(count: usize, seed: u64) -> Vec<SceneSpec> {
    generate("distractor", count, seed, |rng, spec, layout| {
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let dx = side * rng.random_range(90.0..=110.0);
        let dy = rng.random_range(-40.0..=0.0);
        let bystander = ObjectSpec {
            score_base: Some(0.8),
            ..ObjectSpec::at(
                rng.random_range(90.0..=100.0_f64).round(),
                rng.random_range(140.0..=150.0_f64).round(),
                layout.dummy.x + dx,
                layout.dummy.y + dy,
            )
        };
        spec.distractors.push(bystander);
        spec.detection.p_det = 0.95;
        spec.detection.box_jitter = 2.0;
        spec.camera_jitter = 1;
    })
}

/// Several confident players mill about on both flanks while the tackler is
/// only weakly grounded, its score hovering around the strict tier.
pub fn crowded_suite(count: usize, seed: u64) -> Vec<SceneSpec> {
    generate("crowded", count, seed, |rng, spec, layout| {
        spec.player.score_base = Some(rng.random_range(0.29..=0.41));
        let n = rng.random_range(3..=4);
        for k in 0..n {
            let side = if k % 2 == 0 { 1.0 } else { -1.0 };
            let dx = side * rng.random_range(260.0..=360.0);
            let cy = rng.random_range(layout.target.y - 40.0..=layout.target.y + 200.0);
            let cx = layout.dummy.x + dx;
            let mut o = ObjectSpec {
                score_base: Some(rng.random_range(0.6..=0.8)),
                ..ObjectSpec::at(
                    rng.random_range(85.0..=100.0_f64).round(),
                    rng.random_range(135.0..=150.0_f64).round(),
                    cx,
                    cy.min(720.0 - 80.0),
                )
            };
            if rng.random::<bool>() {
                let span = rng.random_range(20.0..=40.0);
                let outward = side * span;
                let (lo, hi) = if outward > 0.0 { (cx, cx + outward) } else { (cx + outward, cx) };
                o.motion = Motion::Lateral {
                    speed: rng.random_range(1.0..=2.0),
                    min_x: lo,
                    max_x: hi,
                };
            }
            spec.distractors.push(o);
        }
        spec.detection.p_det = 0.95;
        spec.detection.box_jitter = 2.0;
        spec.detection.score_noise = 0.04;
        spec.camera_jitter = 1;
    })
}

pub fn suite(name: &str, count: usize, seed: u64) -> Result<Vec<SceneSpec>> {
    Ok(match name {
        "zero-noise" => zero_noise_suite(count, seed),
        "noise" => noise_suite(count, seed),
        "distractor" => distractor_suite(count, seed),
        "crowded" => crowded_suite(count, seed),
        other => {
            return Err(Error::Usage(format!(
                "unknown suite {other:?}; expected one of {}",
                SUITES.join(", ")
            )))
        }
    })
}
