//! Property checks shared by the `properties` and `acceptance` targets.
//! Each takes a case budget and runs on a fixed seed.

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};

use graze::classification::{
    classify_detection, dummy_selection_score, edge_positioned, select_dummy, ClassifiedDetection,
};
use graze::contact::{find_fpoc, propagate_contact, EventResult, SeedRequest, Status};
use graze::evaluation::{metrics_report, Convention};
use graze::geometry::{aspect_ratio, iou, mask_overlap_count};
use graze::interchange::{DetectionRecord, MaskTrackRecord, ObjectKind, PromptLevel, Truth, VideoMeta};
use graze::pipeline::{apply_ablation, rank_candidates, run_batch, run_video_traced, VerificationTrace};
use graze::refinement::{refine, PairBoxes, PresenceSet};
use graze::search::{collect_candidates, Candidate, QueryCache};
use graze::simulator::{build_scene, suites, Scene};
use graze::validation::{directional_score, displacement_score, overall_confidence, Match, MatchedSet, MotionScores};
use graze::{BBox, BitMask, EngineConfig, MaskPropagator, Variant};

pub type Invariant = (&'static str, fn(u32) -> Result<(), String>);

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

fn boxes() -> impl Strategy<Value = BBox> {
    (0.0..500.0f64, 0.0..500.0f64, 0.5..200.0f64, 0.5..200.0f64)
        .prop_map(|(x, y, w, h)| BBox::new(x, y, x + w, y + h).unwrap())
}

fn bitmaps() -> impl Strategy<Value = (u32, u32, Vec<bool>)> {
    (1u32..24, 1u32..24).prop_flat_map(|(h, w)| {
        (Just(h), Just(w), proptest::collection::vec(any::<bool>(), (h * w) as usize))
    })
}

/// A scene from one of the built-in suites.
fn scenes() -> impl Strategy<Value = Scene> {
    (0..suites::SUITES.len(), any::<u64>()).prop_map(|(i, seed)| {
        let spec = suites::suite(suites::SUITES[i], 1, seed).unwrap().remove(0);
        build_scene(&spec).unwrap()
    })
}

fn iou_bounds_and_symmetry(cases: u32) -> Result<(), String> {
    run(cases, (boxes(), boxes()), |(a, b)| {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
        prop_assert_eq!(iou(&a, &a), 1.0);
        if v == 1.0 {
            prop_assert_eq!(a, b);
        }
        Ok(())
    })
}

fn aspect_ratio_of_transpose(cases: u32) -> Result<(), String> {
    run(cases, boxes(), |b| {
        let p = aspect_ratio(&b) * aspect_ratio(&b.transpose());
        prop_assert!((p - 1.0).abs() < 1e-9, "product {}", p);
        Ok(())
    })
}

fn rle_roundtrip(cases: u32) -> Result<(), String> {
    run(cases, bitmaps(), |(h, w, bits)| {
        let m = BitMask::encode(h, w, &bits).unwrap();
        prop_assert_eq!(m.decode(), bits.clone());
        let back: BitMask = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
        Ok(())
    })
}

fn overlap_bounded_and_symmetric(cases: u32) -> Result<(), String> {
    let pair = (1u32..24, 1u32..24).prop_flat_map(|(h, w)| {
        let n = (h * w) as usize;
        (
            Just(h),
            Just(w),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n),
        )
    });
    run(cases, pair, |(h, w, x, y)| {
        let (a, b) = (BitMask::encode(h, w, &x).unwrap(), BitMask::encode(h, w, &y).unwrap());
        let ab = mask_overlap_count(&a, &b).unwrap();
        prop_assert_eq!(ab, mask_overlap_count(&b, &a).unwrap());
        prop_assert!(ab <= a.popcount().min(b.popcount()));
        let scan = x.iter().zip(&y).filter(|(p, q)| **p && **q).count() as u64;
        prop_assert_eq!(ab, scan);
        Ok(())
    })
}

fn phrases() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["player", "person running", "tackle dummy", "red bag", "referee", "helmet"])
        .prop_map(String::from)
}

fn records() -> impl Strategy<Value = DetectionRecord> {
    (0usize..300, boxes(), 0.0..=1.0f64, phrases(), 0usize..3, 0usize..=2).prop_map(
        |(frame, bbox, score, phrase, level, tier)| DetectionRecord {
            video_id: "v".into(),
            frame,
            bbox,
            score,
            phrase,
            prompt_level: PromptLevel::ALL[level],
            threshold_tier: tier,
        },
    )
}

fn record_roundtrip(cases: u32) -> Result<(), String> {
    fn back<T: serde::Serialize + serde::de::DeserializeOwned>(v: &T) -> T {
        serde_json::from_str(&serde_json::to_string(v).unwrap()).unwrap()
    }
    let strat = (records(), bitmaps(), 1usize..1000, proptest::option::of(0usize..500));
    run(cases, strat, |(d, (h, w, bits), frames, fpoc)| {
        prop_assert_eq!(back(&d), d.clone());
        let m = MaskTrackRecord {
            video_id: "v".into(),
            track_id: "t".into(),
            object_kind: ObjectKind::Player,
            frame: d.frame,
            mask: BitMask::encode(h, w, &bits).unwrap(),
            seed_frame: 0,
            seed_bbox: d.bbox,
        };
        prop_assert_eq!(back(&m), m.clone());
        let meta = VideoMeta {
            video_id: "v".into(),
            frame_count: frames,
            height: h,
            width: w,
            fps: 29.97,
        };
        prop_assert_eq!(back(&meta), meta.clone());
        let mut r = EventResult::no_candidates("v", vec!["x".into()]);
        if let Some(t) = fpoc {
            r.status = Status::Accepted;
            r.t_ffbo = Some(t / 2);
            r.t_fpoc = Some(t);
            r.t_end = Some(t + 20);
        }
        prop_assert_eq!(back(&r), r.clone());
        let truth: Truth = [("v".to_string(), frames)].into_iter().collect();
        prop_assert_eq!(back(&truth), truth.clone());
        let cfg = EngineConfig {
            min_consistency: d.score,
            ..EngineConfig::default()
        };
        prop_assert_eq!(back(&cfg), cfg.clone());
        Ok(())
    })
}

fn meta() -> VideoMeta {
    VideoMeta {
        video_id: "v".into(),
        frame_count: 300,
        height: 720,
        width: 1280,
        fps: 30.0,
    }
}

fn players_pass_area_and_edge_filters(cases: u32) -> Result<(), String> {
    let cfg = EngineConfig::default();
    let m = meta();
    run(cases, records(), |d| {
        if let Ok(c) = classify_detection(&d, &m, &cfg) {
            if c.kind == ObjectKind::Player {
                prop_assert!(d.bbox.area() > cfg.min_player_area_fraction * 720.0 * 1280.0);
                prop_assert!(!edge_positioned(&d.bbox, &m, &cfg));
            }
        }
        Ok(())
    })
}

fn dummies() -> impl Strategy<Value = Vec<ClassifiedDetection>> {
    proptest::collection::vec((0usize..5, boxes(), 0.0..=1.0f64), 1..8).prop_map(|v| {
        v.into_iter()
            .map(|(frame, bbox, score)| ClassifiedDetection {
                detection: DetectionRecord {
                    video_id: "v".into(),
                    frame,
                    bbox,
                    score: (score * 4.0).round() / 4.0,
                    phrase: "tackle dummy".into(),
                    prompt_level: PromptLevel::Gear,
                    threshold_tier: 0,
                },
                kind: ObjectKind::Dummy,
            })
            .collect()
    })
}

fn dummy_choice_ignores_order(cases: u32) -> Result<(), String> {
    let cfg = EngineConfig::default();
    let m = meta();
    let strat = dummies().prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle()));
    run(cases, strat, |(a, b)| {
        prop_assert_eq!(select_dummy(&a, &m, &cfg), select_dummy(&b, &m, &cfg));
        Ok(())
    })
}

fn dummy_score_in_unit_interval(cases: u32) -> Result<(), String> {
    let cfg = EngineConfig::default();
    let m = meta();
    run(cases, dummies(), |v| {
        for d in &v {
            let s = dummy_selection_score(d, &m, &cfg);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&s), "score {}", s);
        }
        Ok(())
    })
}

fn player_set(anchor: (f64, f64), past: &[(f64, f64)], future: &[(f64, f64)]) -> MatchedSet {
    let b = |(x, y): (f64, f64)| BBox::from_center(x, y, 40.0, 80.0).unwrap();
    let matches = past
        .iter()
        .enumerate()
        .map(|(i, &p)| (10 - past.len() + i, p))
        .chain(future.iter().enumerate().map(|(i, &p)| (11 + i, p)))
        .map(|(frame, p)| Match {
            frame,
            bbox: b(p),
            confidence: 1.0,
        })
        .collect();
    MatchedSet {
        anchor: ClassifiedDetection {
            detection: DetectionRecord {
                video_id: "v".into(),
                frame: 10,
                bbox: b(anchor),
                score: 0.5,
                phrase: "player".into(),
                prompt_level: PromptLevel::Gear,
                threshold_tier: 0,
            },
            kind: ObjectKind::Player,
        },
        matches,
        frames_considered: 14,
    }
}

fn points(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((100.0..600.0f64, 100.0..600.0f64), n)
}

fn direction_is_similarity_invariant(cases: u32) -> Result<(), String> {
    let strat = (
        (100.0..600.0f64, 100.0..600.0f64),
        points(1..7),
        (100.0..600.0f64, 100.0..600.0f64),
        (0.0..300.0f64, 0.0..300.0f64),
        0.25..4.0f64,
    );
    run(cases, strat, |(anchor, past, dummy, (tx, ty), s)| {
        let moved = |(x, y): (f64, f64)| (x * s + tx, y * s + ty);
        let base = directional_score(&player_set(anchor, &past, &[]), graze::Point::new(dummy.0, dummy.1)).unwrap();
        let past2: Vec<_> = past.iter().map(|&p| moved(p)).collect();
        let d2 = moved(dummy);
        let other = directional_score(&player_set(moved(anchor), &past2, &[]), graze::Point::new(d2.0, d2.1)).unwrap();
        prop_assert!((base - other).abs() < 1e-9, "{} vs {}", base, other);
        Ok(())
    })
}

fn scores_in_unit_interval_and_monotone(cases: u32) -> Result<(), String> {
    let cfg = EngineConfig::default();
    let strat = (
        (100.0..600.0f64, 100.0..600.0f64),
        points(0..7),
        points(0..7),
        (100.0..600.0f64, 100.0..600.0f64),
        [0.0..=1.0f64, 0.0..=1.0, 0.0..=1.0],
        0usize..3,
        0.0..=1.0f64,
    );
    run(cases, strat, |(anchor, past, future, dummy, args, which, bump)| {
        let set = player_set(anchor, &past, &future);
        if let Ok(d) = displacement_score(&set, &cfg) {
            prop_assert!((0.0..=1.0).contains(&d));
        }
        if let Ok(d) = directional_score(&set, graze::Point::new(dummy.0, dummy.1)) {
            prop_assert!((0.0..=1.0).contains(&d));
        }
        let [c, d, r] = args;
        let lo = overall_confidence(c, d, r, &cfg);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&lo));
        let mut raised = args;
        raised[which] = (raised[which] + bump).min(1.0);
        let hi = overall_confidence(raised[0], raised[1], raised[2], &cfg);
        prop_assert!(hi >= lo);
        Ok(())
    })
}

fn candidates() -> impl Strategy<Value = Vec<Candidate>> {
    let one = (0usize..3, 0usize..3, 0usize..3, 0usize..4, 0usize..3, 0usize..4, 0usize..3);
    proptest::collection::vec(one, 1..10).prop_map(|v| {
        let cfg = EngineConfig::default();
        let det = |frame: usize, x: f64, score: f64, kind: ObjectKind| ClassifiedDetection {
            detection: DetectionRecord {
                video_id: "v".into(),
                frame,
                bbox: BBox::from_center(x, 400.0, 90.0, 150.0).unwrap(),
                score,
                phrase: "player".into(),
                prompt_level: PromptLevel::Gear,
                threshold_tier: 0,
            },
            kind,
        };
        v.into_iter()
            .enumerate()
            .map(|(i, (c, d, r, anchor, dist, score, tier))| {
                let frame = 100 + 10 * anchor;
                Candidate {
                    player: det(frame, 640.0 + 50.0 * dist as f64 + i as f64 * 1e-3, 0.3 + 0.1 * score as f64, ObjectKind::Player),
                    dummy: det(frame, 640.0, 0.9, ObjectKind::Dummy),
                    anchor_frame: frame,
                    prompt_level: PromptLevel::Gear,
                    threshold_tier: tier,
                    scores: Some(MotionScores::new(c as f64 / 2.0, d as f64 / 2.0, r as f64 / 2.0, &cfg)),
                }
            })
            .collect()
    })
}

fn ranking_follows_documented_keys(cases: u32) -> Result<(), String> {
    let strat = (candidates().prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle())), any::<bool>());
    run(cases, strat, |((a, b), motion)| {
        let variant = if motion { Variant::Graze } else { Variant::Trace };
        let comp = variant.components();
        let (mut x, mut y) = (a, b);
        rank_candidates(&mut x, &comp);
        rank_candidates(&mut y, &comp);
        prop_assert_eq!(&x, &y);
        for w in x.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            if motion {
                let (sp, sq) = (p.scores.unwrap(), q.scores.unwrap());
                prop_assert!(sp.conf_overall >= sq.conf_overall);
                if sp.conf_overall == sq.conf_overall {
                    prop_assert!(sp.m_dir >= sq.m_dir);
                    if sp.m_dir == sq.m_dir {
                        prop_assert!(p.anchor_frame <= q.anchor_frame);
                    }
                }
            } else {
                prop_assert!(p.dummy_distance() <= q.dummy_distance());
                if p.dummy_distance() == q.dummy_distance() {
                    prop_assert!(p.anchor_frame <= q.anchor_frame);
                }
            }
        }
        Ok(())
    })
}

fn pool_ignores_probe_order(cases: u32) -> Result<(), String> {
    let strat = scenes().prop_flat_map(|s| {
        let positions = EngineConfig::default().probe_positions;
        (Just(s), Just(positions).prop_shuffle())
    });
    run(cases, strat, |(scene, positions)| {
        let meta = scene.meta();
        let base = EngineConfig::default();
        let shuffled = EngineConfig {
            probe_positions: positions,
            ..EngineConfig::default()
        };
        let key = |c: &Candidate| serde_json::to_string(c).unwrap();
        let a: BTreeSet<String> = collect_candidates(&meta, &QueryCache::new(&scene, &meta.video_id), &base)
            .candidates
            .iter()
            .map(key)
            .collect();
        let b: BTreeSet<String> = collect_candidates(&meta, &QueryCache::new(&scene, &meta.video_id), &shuffled)
            .candidates
            .iter()
            .map(key)
            .collect();
        prop_assert_eq!(a, b);
        Ok(())
    })
}

fn relaxing_tiers_keeps_candidates(cases: u32) -> Result<(), String> {
    run(cases, scenes(), |scene| {
        let meta = scene.meta();
        let relaxed = EngineConfig::default();
        let strict = EngineConfig {
            threshold_tiers: relaxed.threshold_tiers[..1].to_vec(),
            ..EngineConfig::default()
        };
        let pool = |cfg: &EngineConfig| collect_candidates(&meta, &QueryCache::new(&scene, &meta.video_id), cfg).candidates;
        let wide = pool(&relaxed);
        for c in pool(&strict) {
            prop_assert!(
                wide.iter().any(|k| *k == c || k.is_duplicate_of(&c, &relaxed)),
                "lost candidate at frame {}",
                c.anchor_frame
            );
        }
        Ok(())
    })
}

fn refinement_never_moves_forward(cases: u32) -> Result<(), String> {
    let strat = (proptest::collection::btree_set(0usize..400, 1..200), any::<prop::sample::Index>());
    run(cases, strat, |(frames, pick)| {
        let cfg = EngineConfig::default();
        let v: Vec<usize> = frames.iter().copied().collect();
        let t_g = v[pick.index(v.len())];
        let b = BBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let r = refine(&PresenceSet { frames }, t_g, PairBoxes { player: b, dummy: b }, &cfg);
        prop_assert!(r.frame <= t_g);
        Ok(())
    })
}

fn refinement_matches_linear_scan(cases: u32) -> Result<(), String> {
    let (bad, first) = super::refinement_agreement(cases as usize, 500, 11);
    match first {
        None => Ok(()),
        Some(example) => Err(format!("{bad} disagreements, e.g. {example}")),
    }
}

fn refinement_probe_calls_are_logarithmic(cases: u32) -> Result<(), String> {
    let strat = (0usize..2000, 1usize..3000, any::<prop::sample::Index>());
    run(cases, strat, |(a, span, pick)| {
        let cfg = EngineConfig::default();
        let t_g = a + pick.index(span);
        let b = BBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        let r = refine(&PresenceSet::new(a..a + span), t_g, PairBoxes { player: b, dummy: b }, &cfg);
        prop_assert_eq!(r.frame, a);
        let walk = t_g - a;
        let budget = 3 + (span as f64).log2().ceil() as usize;
        prop_assert!(r.probe_calls <= walk + budget, "{} calls for walk {}", r.probe_calls, walk);
        Ok(())
    })
}

fn fpoc_monotone_in_threshold(cases: u32) -> Result<(), String> {
    let strat = (proptest::collection::vec(0u64..50, 0..40), 0u64..50, 0u64..50, 0usize..100);
    run(cases, strat, |(series, t1, t2, start)| {
        let (lo, hi) = (t1.min(t2).max(1), t1.max(t2).max(1));
        let key = |x: Option<usize>| x.unwrap_or(usize::MAX);
        prop_assert!(key(find_fpoc(&series, start, lo)) <= key(find_fpoc(&series, start, hi)));
        Ok(())
    })
}

fn overlap_series_bounded(cases: u32) -> Result<(), String> {
    run(cases.min(16), (scenes(), 0.0..1.0f64), |(scene, at)| {
        let cfg = EngineConfig::default();
        let truth = &scene.truth;
        let visible: Vec<usize> = (0..truth.frame_count)
            .filter(|&f| truth.player().rect(f).is_some() && truth.dummy().rect(f).is_some())
            .collect();
        if visible.is_empty() {
            return Ok(());
        }
        let seed_frame = visible[((visible.len() - 1) as f64 * at) as usize];
        let seeds = PairBoxes {
            player: truth.player().rect(seed_frame).unwrap(),
            dummy: truth.dummy().rect(seed_frame).unwrap(),
        };
        let meta = scene.meta();
        let out = propagate_contact(&meta, &scene, seed_frame, seeds, &cfg).unwrap();
        let pairs = scene
            .propagate(&SeedRequest {
                video_id: meta.video_id.clone(),
                seed_frame,
                seeds,
                end_frame: meta.frame_count - 1,
            })
            .unwrap();
        for (count, p) in out.overlap_series.iter().zip(&pairs) {
            prop_assert!(*count <= p.player.popcount().min(p.dummy.popcount()));
        }
        if seed_frame <= truth.gt_fpoc.unwrap_or(usize::MAX) {
            prop_assert_eq!(out.t_fpoc, truth.gt_fpoc);
        }
        Ok(())
    })
}

fn truth_oracles_agree(cases: u32) -> Result<(), String> {
    run(cases.min(16), scenes(), |scene| {
        let t = &scene.truth;
        prop_assert_eq!(t.rect_contact_frame(), t.gt_fpoc);
        prop_assert_eq!(t.pixel_scan_contact_frame(), t.gt_fpoc);
        Ok(())
    })
}

fn same_seed_same_scene(cases: u32) -> Result<(), String> {
    run(cases.min(8), (0..suites::SUITES.len(), any::<u64>()), |(i, seed)| {
        let spec = suites::suite(suites::SUITES[i], 1, seed).unwrap().remove(0);
        let (a, b) = (build_scene(&spec).unwrap(), build_scene(&spec).unwrap());
        let json = |s: &Scene| {
            serde_json::to_string(&(&s.truth, s.detection_records(), s.mask_records())).unwrap()
        };
        prop_assert_eq!(json(&a), json(&b));
        Ok(())
    })
}

fn verification_follows_rank(cases: u32) -> Result<(), String> {
    let strat = (scenes(), prop::sample::select(Variant::ALL.to_vec()));
    run(cases.min(16), strat, |(scene, variant)| {
        let cfg = apply_ablation(&EngineConfig::default(), variant);
        let meta = scene.meta();
        let (result, trace) = run_video_traced(&meta, &scene, &scene, &cfg);
        result.validate_against(&meta).map_err(|e| TestCaseError::fail(e.to_string()))?;
        if !cfg.components.multi_candidate_retry {
            prop_assert!(trace.verification_order.len() <= 1);
        }
        for (pos, &i) in trace.verification_order.iter().enumerate() {
            let c = &trace.candidates[i];
            prop_assert_eq!(c.rank, Some(pos));
            let last = pos + 1 == trace.verification_order.len();
            match &c.verification {
                Some(VerificationTrace::Contact { t_fpoc, .. }) => {
                    prop_assert!(last);
                    if result.status == Status::Accepted {
                        prop_assert_eq!(result.t_fpoc, Some(*t_fpoc));
                    }
                }
                Some(VerificationTrace::Rejected { .. }) => prop_assert!(!last || result.chosen.is_none()),
                None => prop_assert!(false, "verified candidate without an outcome"),
            }
        }
        Ok(())
    })
}

fn results_are_deterministic(cases: u32) -> Result<(), String> {
    run(cases.min(4), any::<u64>(), |seed| {
        let specs = suites::noise_suite(4, seed);
        let set = graze::simulator::SceneSet::build(&specs).unwrap();
        let cfg = EngineConfig::default();
        let json = |jobs: usize| serde_json::to_string(&run_batch(&set.metas(), &set, &set, &cfg, jobs).unwrap()).unwrap();
        let serial = json(1);
        prop_assert_eq!(&serial, &json(1));
        prop_assert_eq!(&serial, &json(4));
        Ok(())
    })
}

fn accuracy_nesting(cases: u32) -> Result<(), String> {
    let strat = proptest::collection::vec((proptest::option::of(0usize..300), proptest::option::of(0usize..300)), 0..40);
    run(cases, strat, |rows| {
        let mut results = Vec::new();
        let mut truth = Truth::new();
        for (i, (pred, gt)) in rows.iter().enumerate() {
            let id = format!("v{i}");
            let mut r = EventResult::no_candidates(&id, vec![]);
            if let Some(p) = pred {
                r.status = Status::Accepted;
                r.t_ffbo = Some(0);
                r.t_fpoc = Some(*p);
                r.t_end = Some(*p);
            }
            results.push(r);
            if let Some(g) = gt {
                truth.insert(id, *g);
            }
        }
        let eps = [1, 5, 10, 15, 20, 40];
        let rep = metrics_report(&results, &truth, &eps, results.len(), Convention::Strict);
        let mut prev = (0.0, 0.0);
        for e in eps {
            let (Some(end), cond) = (rep.end_to_end[&e], rep.conditional[&e]) else {
                continue;
            };
            prop_assert!(end >= prev.0);
            if let Some(c) = cond {
                prop_assert!(c >= prev.1);
                prop_assert!(c + 1e-9 >= end);
                prev.1 = c;
            }
            prev.0 = end;
        }
        if let (Some(tail), Some(c20)) = (rep.tail_ge_20, rep.conditional[&20]) {
            prop_assert!((tail + c20 - 100.0).abs() < 1e-9);
        }
        Ok(())
    })
}

pub fn all() -> Vec<Invariant> {
    vec![
        ("iou bounds and symmetry", iou_bounds_and_symmetry),
        ("aspect ratio of transpose", aspect_ratio_of_transpose),
        ("rle roundtrip", rle_roundtrip),
        ("mask overlap bounds", overlap_bounded_and_symmetric),
        ("record roundtrip", record_roundtrip),
        ("player filters", players_pass_area_and_edge_filters),
        ("dummy choice ignores order", dummy_choice_ignores_order),
        ("dummy score range", dummy_score_in_unit_interval),
        ("direction similarity invariance", direction_is_similarity_invariant),
        ("score ranges and monotonicity", scores_in_unit_interval_and_monotone),
        ("ranking keys", ranking_follows_documented_keys),
        ("pool ignores probe order", pool_ignores_probe_order),
        ("tier relaxation keeps candidates", relaxing_tiers_keeps_candidates),
        ("refinement never moves forward", refinement_never_moves_forward),
        ("refinement matches linear scan", refinement_matches_linear_scan),
        ("refinement probe calls", refinement_probe_calls_are_logarithmic),
        ("fpoc monotone in threshold", fpoc_monotone_in_threshold),
        ("overlap series bounds", overlap_series_bounded),
        ("truth oracles agree", truth_oracles_agree),
        ("same seed same scene", same_seed_same_scene),
        ("verification follows rank", verification_follows_rank),
        ("results deterministic across jobs", results_are_deterministic),
        ("accuracy nesting", accuracy_nesting),
    ]
}
