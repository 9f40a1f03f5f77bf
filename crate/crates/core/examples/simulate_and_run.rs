//! Build a few noisy scenes, run the full engine on them and compare each
//! result with the scene's ground truth.

use graze::pipeline::run_video_traced;
use graze::simulator::{suites, SceneSet};
use graze::EngineConfig;

fn main() -> graze::Result<()> {
    let cfg = EngineConfig::default();
    let set = SceneSet::build(&suites::noise_suite(5, 3))?;
    for scene in set.scenes() {
        let (r, trace) = run_video_traced(&scene.meta(), scene, scene, &cfg);
        println!(
            "{}: {:?}  ffbo {:?} (truth {:?})  fpoc {:?} (truth {:?})  {} candidates, {} queries",
            r.video_id,
            r.status,
            r.t_ffbo,
            scene.truth.gt_ffbo,
            r.t_fpoc,
            scene.truth.gt_fpoc,
            trace.candidates.len(),
            trace.queries
        );
    }
    Ok(())
}
