//! Propagate masks from seed boxes on a synthetic scene and report the first
//! frame where the player and dummy masks share a pixel.

use graze::contact::{event_window, propagate_contact};
use graze::refinement::PairBoxes;
use graze::simulator::{build_scene, suites};
use graze::EngineConfig;

fn main() -> graze::Result<()> {
    let cfg = EngineConfig::default();
    let spec = suites::zero_noise_suite(1, 21).remove(0);
    let scene = build_scene(&spec)?;
    let truth = &scene.truth;
    let seed_frame = truth.gt_ffbo.expect("both objects appear");
    let seeds = PairBoxes {
        player: truth.player().rect(seed_frame).unwrap(),
        dummy: truth.dummy().rect(seed_frame).unwrap(),
    };

    let out = propagate_contact(&scene.meta(), &scene, seed_frame, seeds, &cfg)?;
    let fpoc = out.t_fpoc.expect("contact");
    println!("seeded at frame {seed_frame}, {} frames scanned", out.overlap_series.len());
    for (i, count) in out.overlap_series.iter().enumerate().rev().take(4).rev() {
        println!("  frame {:>3}: {count} shared pixels", seed_frame + i);
    }
    println!(
        "contact at {fpoc}, window ends at {}, ground truth {:?}",
        event_window(fpoc, truth.frame_count, &cfg),
        truth.gt_fpoc
    );
    Ok(())
}
