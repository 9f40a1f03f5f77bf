//! Sort raw grounded boxes into player and dummy detections, pick the dummy
//! and shortlist the players nearest to it.

use graze::classification::{classify_detection, select_dummy, select_player_candidates};
use graze::interchange::{DetectionRecord, ObjectKind, PromptLevel, VideoMeta};
use graze::{BBox, EngineConfig};

fn det(cx: f64, cy: f64, w: f64, h: f64, score: f64, phrase: &str) -> DetectionRecord {
    DetectionRecord {
        video_id: "drill-01".into(),
        frame: 120,
        bbox: BBox::from_center(cx, cy, w, h).unwrap(),
        score,
        phrase: phrase.into(),
        prompt_level: PromptLevel::Gear,
        threshold_tier: 0,
    }
}

fn main() {
    let cfg = EngineConfig::default();
    let meta = VideoMeta {
        video_id: "drill-01".into(),
        frame_count: 300,
        height: 720,
        width: 1280,
        fps: 30.0,
    };
    let raw = [
        det(640.0, 200.0, 60.0, 180.0, 0.82, "tackle dummy"),
        det(620.0, 480.0, 95.0, 145.0, 0.61, "football player"),
        det(900.0, 420.0, 90.0, 150.0, 0.74, "person"),
        det(80.0, 400.0, 90.0, 150.0, 0.90, "player"),
        det(400.0, 650.0, 140.0, 50.0, 0.55, "blocking pad"),
        det(300.0, 300.0, 20.0, 30.0, 0.40, "helmet"),
    ];

    let mut players = Vec::new();
    let mut dummies = Vec::new();
    for d in &raw {
        match classify_detection(d, &meta, &cfg) {
            Ok(c) => {
                println!("{:<16} -> {:?}", d.phrase, c.kind);
                match c.kind {
                    ObjectKind::Player => players.push(c),
                    ObjectKind::Dummy => dummies.push(c),
                }
            }
            Err(why) => println!("{:<16} -> rejected ({why:?})", d.phrase),
        }
    }

    let dummy = select_dummy(&dummies, &meta, &cfg).expect("a dummy");
    println!("\ndummy at {:?}", dummy.center());
    for p in select_player_candidates(&players, &dummy, &cfg) {
        println!(
            "candidate {:<16} {:>6.1} px from the dummy",
            p.detection.phrase,
            p.center().distance(&dummy.center())
        );
    }
}
