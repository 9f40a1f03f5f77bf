//! Worked examples for the scoring formulas, each computed by hand.

use graze::classification::{
    classify_detection, dummy_selection_score, edge_positioned, select_dummy, select_player_candidates,
    ClassifiedDetection, Rejection,
};
use graze::config::{Components, ConsistencyMode};
use graze::contact::{accept_result, event_window, find_fpoc, Acceptance};
use graze::evaluation::{percent, round1, tolerance_accuracy, Convention};
use graze::geometry::{aspect_ratio, center, iou, mask_overlap_count, size_ratio};
use graze::interchange::{DetectionRecord, ObjectKind, PromptLevel, VideoMeta};
use graze::pipeline::Variant;
use graze::refinement::{phase1_backtrack, phase2_probe, refine_ffbo, PairBoxes, PresenceSet};
use graze::search::{base_probe_frames, dedup_candidates, probe_windows, Candidate};
use graze::validation::{
    displacement_score, gate, match_confidence, match_confidence_terms, overall_confidence, validate_candidate,
    GateOutcome, Match, MatchedSet, MotionScores,
};
use graze::{BBox, BitMask, EngineConfig};
use std::collections::BTreeMap;

pub type Check = (&'static str, fn() -> Result<(), String>);

fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want}"))
    }
}

fn same<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn bx(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
    BBox::new(x1, y1, x2, y2).unwrap()
}

fn meta() -> VideoMeta {
    VideoMeta {
        video_id: "v".into(),
        frame_count: 100,
        height: 1000,
        width: 1000,
        fps: 30.0,
    }
}

fn det(frame: usize, b: BBox, score: f64, phrase: &str) -> DetectionRecord {
    DetectionRecord {
        video_id: "v".into(),
        frame,
        bbox: b,
        score,
        phrase: phrase.into(),
        prompt_level: PromptLevel::Gear,
        threshold_tier: 0,
    }
}

fn classified(frame: usize, b: BBox, score: f64, kind: ObjectKind) -> ClassifiedDetection {
    ClassifiedDetection {
        detection: det(frame, b, score, if kind == ObjectKind::Dummy { "tackle dummy" } else { "player" }),
        kind,
    }
}

fn centered(cx: f64, cy: f64, w: f64, h: f64) -> BBox {
    BBox::from_center(cx, cy, w, h).unwrap()
}

fn geometry() -> Result<(), String> {
    close("iou half-shifted squares", iou(&bx(0., 0., 10., 10.), &bx(5., 0., 15., 10.)), 50.0 / 150.0, 1e-12)?;
    let c = center(&bx(2., 4., 6., 8.));
    same("center", (c.x, c.y), (4.0, 6.0))?;
    close("tall aspect", aspect_ratio(&bx(0., 0., 10., 30.)), 3.0, 1e-12)?;
    close("wide aspect", aspect_ratio(&bx(0., 0., 30., 10.)), 1.0 / 3.0, 1e-12)?;
    close("size ratio", size_ratio(&bx(0., 0., 10., 10.), &bx(0., 0., 20., 20.)), 0.25, 1e-12)?;
    let a = BitMask::from_box(20, 20, &bx(0., 0., 10., 10.));
    let b = BitMask::from_box(20, 20, &bx(6., 7., 16., 17.));
    same("overlap of a 4x3 region", mask_overlap_count(&a, &b).unwrap(), 12)
}

fn classification() -> Result<(), String> {
    let cfg = EngineConfig::default();
    let m = meta();
    let kind = |d: &DetectionRecord| classify_detection(d, &m, &cfg).map(|c| c.kind);
    same("tall red bag", kind(&det(0, centered(500., 500., 100., 250.), 0.5, "red bag")), Ok(ObjectKind::Dummy))?;
    same(
        "flat blocking pad",
        kind(&det(0, centered(500., 500., 100., 60.), 0.5, "blocking pad")),
        Err(Rejection::HorizontalDummy),
    )?;
    // 100 x 200 is 0.02 of a 1000 x 1000 frame
    same(
        "centered runner",
        kind(&det(0, centered(500., 500., 100., 200.), 0.5, "person running")),
        Ok(ObjectKind::Player),
    )?;
    same("person at the side", kind(&det(0, centered(50., 500., 100., 200.), 0.5, "person")), Err(Rejection::Edge))?;
    same("right margin", edge_positioned(&centered(900., 500., 10., 10.), &m, &cfg), true)?;
    same("top band", edge_positioned(&centered(500., 50., 10., 10.), &m, &cfg), true)
}

fn dummy_selection() -> Result<(), String> {
    let cfg = EngineConfig::default();
    let m = meta();
    // 0.4 * 0.9 + 0.3 * 1 + 0.3 * 1
    let d = classified(0, centered(500., 500., 50., 150.), 0.9, ObjectKind::Dummy);
    close("centered dummy", dummy_selection_score(&d, &m, &cfg), 0.96, 1e-9)?;
    let mid = classified(0, centered(500., 500., 50., 150.), 0.5, ObjectKind::Dummy);
    let corner = classified(0, centered(1., 3., 2., 6.), 1.0, ObjectKind::Dummy);
    close("centered low score", dummy_selection_score(&mid, &m, &cfg), 0.80, 1e-9)?;
    close("corner high score", dummy_selection_score(&corner, &m, &cfg), 0.70, 0.005)?;
    let chosen = select_dummy(&[corner, mid.clone()], &m, &cfg).unwrap();
    same("centered wins", chosen, mid)
}

fn player_shortlist() -> Result<(), String> {
    let cfg = EngineConfig::default();
    let dummy = classified(0, centered(500., 300., 50., 150.), 0.9, ObjectKind::Dummy);
    let players: Vec<_> = [400.0, 100.0, 250.0, 900.0, 50.0]
        .iter()
        .map(|&d| classified(0, centered(500. + d, 300., 40., 80.), 0.5, ObjectKind::Player))
        .collect();
    let got: Vec<f64> = select_player_candidates(&players, &dummy, &cfg)
        .iter()
        .map(|p| p.center().x - 500.0)
        .collect();
    same("nearest three", got, vec![50.0, 100.0, 250.0])
}

fn match_confidence_examples() -> Result<(), String> {
    let cfg = EngineConfig::default();
    let b = bx(10., 10., 50., 90.);
    close("identical boxes", match_confidence(&b, &b, &cfg), 1.0, 1e-12)?;
    close("iou 0.1, 100 px, ratio 0.5", match_confidence_terms(0.10, 100.0, 0.5, &cfg), 0.50, 1e-12)?;
    // 0.55 * 0 + 0.30 * 0 + 0.15 * 0.2
    close("disjoint and far", match_confidence_terms(0.0, 400.0, 0.2, &cfg), 0.03, 1e-12)
}

fn matched(anchor: ClassifiedDetection, pts: &[(usize, f64, f64, f64)]) -> MatchedSet {
    MatchedSet {
        anchor,
        matches: pts
            .iter()
            .map(|&(frame, x, y, confidence)| Match {
                frame,
                bbox: centered(x, y, 40.0, 80.0),
                confidence,
            })
            .collect(),
        frames_considered: 14,
    }
}

fn consistency_and_counts() -> Result<(), String> {
    let cfg = EngineConfig::default();
    let anchor = classified(20, centered(300., 300., 40., 80.), 0.5, ObjectKind::Player);
    let set = matched(anchor.clone(), &[(18, 300., 300., 0.8), (19, 300., 300., 0.6), (21, 300., 300., 0.7)]);
    close("c_cons", set.consistency(ConsistencyMode::MatchedOnly), 0.7, 1e-12)?;

    let neighbors = |frames: &[usize], kind: ObjectKind| -> BTreeMap<usize, Vec<ClassifiedDetection>> {
        frames
            .iter()
            .map(|&f| (f, vec![classified(f, centered(300., 300., 40., 80.), 0.5, kind)]))
            .collect()
    };
    same(
        "player with two matches",
        validate_candidate(&anchor, &neighbors(&[18, 19], ObjectKind::Player), 100, &cfg).is_ok(),
        false,
    )?;
    let dummy = classified(20, centered(300., 300., 40., 80.), 0.5, ObjectKind::Dummy);
    same(
        "dummy with two matches",
        validate_candidate(&dummy, &neighbors(&[18, 19], ObjectKind::Dummy), 100, &cfg).is_ok(),
        true,
    )
}

fn motion_examples() -> Result<(), String> {
    let cfg = EngineConfig::default();
    let anchor = classified(20, centered(300., 300., 40., 80.), 0.5, ObjectKind::Player);
    let set = matched(anchor, &[(18, 350., 300., 1.0), (22, 250., 300., 1.0), (23, 300., 350., 1.0)]);
    close("mean displacement 50 px", displacement_score(&set, &cfg).unwrap(), 0.25, 1e-12)?;
    same("on both thresholds", gate(0.08, 0.30, &cfg), GateOutcome::Pass)?;
    same("too still", gate(0.05, 0.9, &cfg), GateOutcome::FailDisplacement)?;
    same("wrong way", gate(0.5, 0.1, &cfg), GateOutcome::FailDirection)?;
    close("overall", overall_confidence(1.0, 0.08, 0.30, &cfg), 0.444, 1e-12)
}

fn search_examples() -> Result<(), String> {
    let cfg = EngineConfig::default();
    let mut base = base_probe_frames(300, &cfg);
    base.sort();
    // 0.7 * 299 = 209.3 rounds to 209
    same("base frames", base, vec![30, 90, 150, 209, 269, 284])?;
    let narrow = EngineConfig {
        probe_positions: vec![1.0 / 3.0],
        ..EngineConfig::default()
    };
    same("clipped window", probe_windows(10, &narrow), vec![(0..=8).collect::<Vec<usize>>()])?;

    // one pair at two frames under two tiers
    let cand = |frame: usize, tier: usize, dx: f64| Candidate {
        player: classified(frame, centered(500. + dx, 600., 90., 150.), 0.5, ObjectKind::Player),
        dummy: classified(frame, centered(500., 300., 60., 180.), 0.9, ObjectKind::Dummy),
        anchor_frame: frame,
        prompt_level: PromptLevel::Gear,
        threshold_tier: tier,
        scores: None,
    };
    let raw = vec![cand(150, 0, 0.0), cand(150, 1, 1.0), cand(209, 0, 0.0), cand(209, 1, 1.0)];
    let kept = dedup_candidates(raw, &cfg);
    same("dedup", kept.iter().map(|c| (c.anchor_frame, c.threshold_tier)).collect(), vec![(150, 0), (209, 0)])
}

fn refinement_examples() -> Result<(), String> {
    let cfg = EngineConfig::default();
    let b = bx(0., 0., 10., 10.);
    let refs = PairBoxes { player: b, dummy: b };
    let p1 = |set: PresenceSet, t: usize| phase1_backtrack(&set, t, refs, &cfg);
    let p2 = |set: PresenceSet, t: usize| phase2_probe(&set, t, refs, &cfg);
    same("walk over [30,120]", p1(PresenceSet::new(30..=120), 110), 30)?;
    same("one gap", p1(PresenceSet::new((40..=110).filter(|&f| f != 75)), 100), 40)?;
    same("two misses", p1(PresenceSet::new((50..=69).chain(72..=100)), 100), 72)?;
    same("ladder over [30,120]", p2(PresenceSet::new(30..=120), 72), 30)?;
    same("only t1", p2(PresenceSet::new([60]), 60), 60)?;
    same("ladder to zero", p2(PresenceSet::new(0..=120), 60), 0)?;
    same("refine contiguous", refine_ffbo(&PresenceSet::new(17..=240), 200, refs, &cfg), 17)?;
    same("refine single frame", refine_ffbo(&PresenceSet::new([88]), 88, refs, &cfg), 88)?;
    same(
        "refine with one gap",
        refine_ffbo(&PresenceSet::new((17..=240).filter(|&f| f != 150)), 200, refs, &cfg),
        17,
    )
}

fn contact_examples() -> Result<(), String> {
    let cfg = EngineConfig::default();
    same("window", event_window(50, 200, &cfg), 70)?;
    same("window clipped", event_window(190, 200, &cfg), 199)?;
    same("first overlap", find_fpoc(&[0, 0, 3, 5], 10, 1), Some(12))?;
    same("no overlap", find_fpoc(&[0, 0, 0], 10, 1), None)?;
    let review = |c: f64, d: f64| accept_result(&MotionScores { c_cons: 0.0, m_disp: 0.0, m_dir: d, conf_overall: c }, &cfg);
    same("both low", review(0.24, 0.19), Acceptance::ManualReview)?;
    same("direction fine", review(0.24, 0.50), Acceptance::Accepted)?;
    same("confidence fine", review(0.90, 0.10), Acceptance::Accepted)
}

fn ablation_rows() -> Result<(), String> {
    let rows = |v: Variant| v.components().table_row();
    let sole = [true, false, false, false, false, false];
    same("SOLE", rows(Variant::Sole), sole)?;
    let trace = Components {
        multi_prompt_search: false,
        temporal_validation: true,
        motion_scoring: false,
        backward_refinement: true,
        multi_candidate_retry: false,
    };
    same("TRACE", Variant::Trace.components(), trace)?;
    same("GRAZE", rows(Variant::Graze)[1..].iter().all(|&on| on), true)
}

fn evaluation_examples() -> Result<(), String> {
    let errs = [0, 3, 7, 12, 25];
    same("eps 5", tolerance_accuracy(&errs, 5, 5, Convention::Strict), Some(40.0))?;
    same("eps 15", tolerance_accuracy(&errs, 15, 5, Convention::Strict), Some(80.0))?;
    same("conditional", round1(percent(610, 666).unwrap()), 91.6)?;
    same("end to end", round1(percent(610, 738).unwrap()), 82.7)
}

pub fn all() -> Vec<Check> {
    vec![
        ("geometry", geometry),
        ("classification", classification),
        ("dummy selection", dummy_selection),
        ("player shortlist", player_shortlist),
        ("match confidence", match_confidence_examples),
        ("consistency and match counts", consistency_and_counts),
        ("displacement, gate, overall", motion_examples),
        ("probe frames and dedup", search_examples),
        ("backward refinement", refinement_examples),
        ("contact and acceptance", contact_examples),
        ("ablation rows", ablation_rows),
        ("tolerance accuracy", evaluation_examples),
    ]
}
