//! Tolerance-window accuracy over a handful of results, under both
//! boundary conventions.

use graze::contact::EventResult;
use graze::evaluation::{metrics_report, render_table, Convention};
use graze::interchange::Truth;
use graze::Status;

fn accepted(id: &str, fpoc: usize) -> EventResult {
    EventResult {
        status: Status::Accepted,
        t_ffbo: Some(fpoc.saturating_sub(40)),
        t_fpoc: Some(fpoc),
        t_end: Some(fpoc + 20),
        ..EventResult::no_candidates(id, vec![])
    }
}

fn main() {
    let results = vec![
        accepted("a", 100),
        accepted("b", 143),
        accepted("c", 67),
        accepted("d", 212),
        accepted("e", 90),
        EventResult::no_candidates("f", vec!["no player/dummy pair found at any probe frame".into()]),
    ];
    let truth: Truth = [("a", 100), ("b", 140), ("c", 60), ("d", 200), ("e", 115), ("f", 80)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    for convention in [Convention::Strict, Convention::Inclusive] {
        let report = metrics_report(&results, &truth, &[5, 10, 15, 20], results.len(), convention);
        println!("{convention:?}\n{}", render_table(&report));
    }
}
