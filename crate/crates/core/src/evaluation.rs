//! Tolerance-window accuracy, coverage and the summary table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::contact::EventResult;
use crate::interchange::Truth;

/// How a frame error is compared against a tolerance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `|err| < eps`
    #[default]
    Strict,
    /// `|err| <= eps`
    Inclusive,
}

impl Convention {
    pub fn within(self, error: i64, eps: u32) -> bool {
        let e = error.unsigned_abs();
        match self {
            Convention::Strict => e < eps as u64,
            Convention::Inclusive => e <= eps as u64,
        }
    }
}

/// `100 * num / den`, or `None` for an empty denominator.
pub fn percent(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

/// Round to one decimal place, as reported in tables.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Share of `errors` within `eps`, over `denominator` videos.
pub fn tolerance_accuracy(errors: &[i64], eps: u32, denominator: usize, convention: Convention) -> Option<f64> {
    let hits = errors.iter().filter(|&&e| convention.within(e, eps)).count();
    percent(hits, denominator)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: usize,
    /// Videos with a contact frame.
    pub segmented: usize,
    pub coverage: Option<f64>,
    /// Segmented videos that also have a label.
    pub evaluable: usize,
    pub convention: Convention,
    /// Accuracy over all `total` videos.
    pub end_to_end: BTreeMap<u32, Option<f64>>,
    /// Accuracy over the evaluable videos.
    pub conditional: BTreeMap<u32, Option<f64>>,
    /// Evaluable videos off by 20 frames or more.
    pub tail_ge_20: Option<f64>,
    /// Predicted minus true contact frame.
    pub errors: BTreeMap<String, i64>,
}

pub fn metrics_report(
    results: &[EventResult],
    truth: &Truth,
    tolerances: &[u32],
    total: usize,
    convention: Convention,
) -> MetricsReport {
    let mut errors = BTreeMap::new();
    let mut segmented = 0;
    for r in results {
        let Some(pred) = r.t_fpoc else { continue };
        segmented += 1;
        if let Some(&gt) = truth.get(&r.video_id) {
            errors.insert(r.video_id.clone(), pred as i64 - gt as i64);
        }
    }
    let errs: Vec<i64> = errors.values().copied().collect();
    let evaluable = errs.len();
    let mut end_to_end = BTreeMap::new();
    let mut conditional = BTreeMap::new();
    for &eps in tolerances {
        end_to_end.insert(eps, tolerance_accuracy(&errs, eps, total, convention));
        conditional.insert(eps, tolerance_accuracy(&errs, eps, evaluable, convention));
    }
    let tail = errs.iter().filter(|e| e.unsigned_abs() >= 20).count();
    MetricsReport {
        total,
        segmented,
        coverage: percent(segmented, total),
        evaluable,
        convention,
        end_to_end,
        conditional,
        tail_ge_20: percent(tail, evaluable),
        errors,
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"))
}

/// Aligned text table: coverage, end-to-end and conditional accuracy.
pub fn render_table(report: &MetricsReport) -> String {
    let op = match report.convention {
        Convention::Strict => "<",
        Convention::Inclusive => "<=",
    };
    let mut out = String::new();
    let mut row = |label: String, value: String| {
        let _ = writeln!(out, "  {label:<28}{value:>8}");
    };
    row("Segmented videos".into(), report.segmented.to_string());
    row("Total videos".into(), report.total.to_string());
    row("Coverage (%)".into(), cell(report.coverage));
    let _ = writeln!(out, "End-to-end accuracy (%)");
    for (eps, v) in &report.end_to_end {
        let _ = writeln!(out, "  {:<28}{:>8}", format!("|err| {op} {eps} f"), cell(*v));
    }
    let _ = writeln!(out, "Conditional accuracy (%), {} evaluable", report.evaluable);
    for (eps, v) in &report.conditional {
        let _ = writeln!(out, "  {:<28}{:>8}", format!("|err| {op} {eps} f"), cell(*v));
    }
    let _ = writeln!(out, "  {:<28}{:>8}", "|err| >= 20 f", cell(report.tail_ge_20));
    out
}
