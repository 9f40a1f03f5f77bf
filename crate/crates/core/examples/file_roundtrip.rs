//! Export scenes to the provider file formats, load them back through the
//! file-backed providers and run the engine from disk.

use graze::contact::FilePropagator;
use graze::interchange::{read_meta, read_truth, write_results};
use graze::pipeline::run_batch;
use graze::search::FileDetector;
use graze::simulator::{export_scenes, suites, SceneSet};
use graze::EngineConfig;

fn main() -> graze::Result<()> {
    let dir = std::env::temp_dir().join("graze-file-roundtrip");
    std::fs::create_dir_all(&dir).map_err(|e| graze::Error::Usage(e.to_string()))?;
    let set = SceneSet::build(&suites::distractor_suite(3, 12))?;
    export_scenes(&set, &dir)?;

    let metas = read_meta(dir.join("meta.json"))?;
    let det = FileDetector::open(dir.join("dets.jsonl"), &metas)?;
    let prop = FilePropagator::open(dir.join("masks.jsonl"))?;
    let truth = read_truth(dir.join("truth.json"))?;
    let results = run_batch(&metas, &det, &prop, &EngineConfig::default(), 2)?;
    write_results(dir.join("results.json"), &results)?;

    println!("{} detection records loaded from {}", det.len(), dir.display());
    for r in &results {
        println!("{}: fpoc {:?}, truth {:?}", r.video_id, r.t_fpoc, truth.get(&r.video_id));
    }
    Ok(())
}
