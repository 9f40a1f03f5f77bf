//! Temporal validation and motion scores for a player running at the dummy
//! and for one standing beside it.

use std::collections::BTreeMap;

use graze::classification::ClassifiedDetection;
use graze::interchange::{DetectionRecord, ObjectKind, PromptLevel};
use graze::validation::{directional_score, displacement_score, gate, validate_candidate, MotionScores};
use graze::{BBox, EngineConfig, Point};

fn player(frame: usize, cx: f64, cy: f64) -> ClassifiedDetection {
    ClassifiedDetection {
        detection: DetectionRecord {
            video_id: "drill-01".into(),
            frame,
            bbox: BBox::from_center(cx, cy, 90.0, 150.0).unwrap(),
            score: 0.6,
            phrase: "football player".into(),
            prompt_level: PromptLevel::Gear,
            threshold_tier: 0,
        },
        kind: ObjectKind::Player,
    }
}

fn report(label: &str, path: impl Fn(usize) -> (f64, f64), dummy: Point, cfg: &EngineConfig) {
    let t0 = 100;
    let (x, y) = path(t0);
    let anchor = player(t0, x, y);
    let neighbors: BTreeMap<usize, Vec<ClassifiedDetection>> = cfg
        .validation_offsets
        .iter()
        .map(|d| (t0 as i64 + d) as usize)
        .map(|f| {
            let (x, y) = path(f);
            (f, vec![player(f, x, y)])
        })
        .collect();
    let set = match validate_candidate(&anchor, &neighbors, 300, cfg) {
        Ok(set) => set,
        Err(why) => {
            println!("{label}: rejected by validation, {why:?}");
            return;
        }
    };
    let c_cons = set.consistency(cfg.consistency_mode);
    let m_disp = displacement_score(&set, cfg).unwrap();
    let m_dir = directional_score(&set, dummy).unwrap();
    let scores = MotionScores::new(c_cons, m_disp, m_dir, cfg);
    println!(
        "{label}: c_cons {:.3}  m_disp {:.3}  m_dir {:.3}  overall {:.3}  gate {:?}",
        scores.c_cons,
        scores.m_disp,
        scores.m_dir,
        scores.conf_overall,
        gate(m_disp, m_dir, cfg)
    );
}

fn main() {
    let cfg = EngineConfig::default();
    let dummy = Point::new(640.0, 200.0);
    report("tackler", |f| (640.0, 700.0 - 4.0 * f as f64), dummy, &cfg);
    report("bystander", |f| (740.0 + if f % 2 == 0 { 1.0 } else { -1.0 }, 190.0), dummy, &cfg);
    report("retreating", |f| (640.0, 100.0 + 3.0 * f as f64), dummy, &cfg);
}
