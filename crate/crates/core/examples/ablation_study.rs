//! Run all four variants over each synthetic suite and print coverage and
//! tolerance accuracy.
//!
//! cargo run --release --example ablation_study -- [count] [seed]

use graze::evaluation::{metrics_report, Convention};
use graze::pipeline::{apply_ablation, run_batch};
use graze::simulator::{suites, SceneSet};
use graze::{EngineConfig, Variant};

fn main() -> graze::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(50, |s| s.parse().expect("count"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let base = EngineConfig::default();

    println!("{:<12}{:<8}{:>10}{:>10}{:>10}{:>10}", "suite", "variant", "coverage", "<5 f", "<20 f", "exact");
    for name in suites::SUITES {
        let set = SceneSet::build(&suites::suite(name, count, seed)?)?;
        let metas = set.metas();
        let truth = set.truth();
        for variant in Variant::ALL {
            let cfg = apply_ablation(&base, variant);
            let results = run_batch(&metas, &set, &set, &cfg, 4)?;
            let report = metrics_report(&results, &truth, &[1, 5, 20], metas.len(), Convention::Strict);
            let show = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.1}"));
            println!(
                "{:<12}{:<8}{:>10}{:>10}{:>10}{:>10}",
                name,
                variant.to_string(),
                show(report.coverage),
                show(report.end_to_end[&5]),
                show(report.end_to_end[&20]),
                show(report.end_to_end[&1]),
            );
        }
    }
    Ok(())
}
