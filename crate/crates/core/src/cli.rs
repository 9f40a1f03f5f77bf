//! The `graze` command line: `run`, `simulate` and `eval`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::config::EngineConfig;
use crate::contact::{FilePropagator, Status};
use crate::error::{Error, Result};
use crate::evaluation::{metrics_report, render_table, Convention};
use crate::interchange::{read_config, read_json, read_meta, read_results, read_truth, write_json, write_results};
use crate::pipeline::{apply_ablation, run_batch_traced, Variant};
use crate::search::FileDetector;
use crate::simulator::{export_scenes, suites, SceneSet, SceneSpec};

#[derive(Debug, Parser)]
#[command(name = "graze", version, about = "Locate the first point of contact in tackle drill videos")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the engine over every video in a metadata file.
    Run(RunArgs),
    /// Generate synthetic scenes and their provider files.
    Simulate(SimulateArgs),
    /// Score results against ground truth.
    Eval(EvalArgs),
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub meta: PathBuf,
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub masks: PathBuf,
    /// Engine configuration; defaults are used when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "GRAZE", value_parser = parse_variant)]
    pub variant: Variant,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write per-candidate decision traces to this file.
    #[arg(long)]
    pub dump_trace: Option<PathBuf>,
    /// Override a configuration field, e.g. `--set post_contact_frames=30`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON array of scene specifications.
    #[arg(long, conflicts_with = "suite", required_unless_present = "suite")]
    pub scenes: Option<PathBuf>,
    /// Built-in suite: zero-noise, noise, distractor or crowded.
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// With `--scenes`, scene i gets seed S + i; with `--suite`, the suite seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Number of input videos; defaults to the number of results.
    #[arg(long)]
    pub total: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "5,10,15,20")]
    pub tolerances: Vec<u32>,
    /// Count an error equal to the tolerance as correct.
    #[arg(long)]
    pub inclusive: bool,
    /// Also write the report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Set a dotted field of a JSON object, e.g. `components.motion_scoring`.
fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Usage(format!("--set {key}: {part} is not inside an object")))?;
        if !obj.contains_key(*part) {
            return Err(Error::Usage(format!("--set {key}: unknown field {part}")));
        }
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.get_mut(*part).unwrap();
    }
    Ok(())
}

/// Defaults, then the config file, then the variant's components, then
/// `--set` overrides.
pub fn resolve_config(file: Option<&Path>, variant: Variant, overrides: &[String]) -> Result<EngineConfig> {
    let base = match file {
        Some(p) => read_config(p)?,
        None => EngineConfig::default(),
    };
    let cfg = apply_ablation(&base, variant);
    if overrides.is_empty() {
        return Ok(cfg);
    }
    let mut tree = serde_json::to_value(&cfg).map_err(|e| Error::Usage(e.to_string()))?;
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got {o:?}")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(&mut tree, key.trim(), value)?;
    }
    let cfg: EngineConfig =
        serde_json::from_value(tree).map_err(|e| Error::Usage(format!("--set: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = resolve_config(args.config.as_deref(), args.variant, &args.overrides)?;
    let metas = read_meta(&args.meta)?;
    let det = FileDetector::open(&args.detections, &metas)?;
    let prop = FilePropagator::open(&args.masks)?;
    let runs = run_batch_traced(&metas, &det, &prop, &cfg, args.jobs.max(1))?;
    for ((result, _), meta) in runs.iter().zip(&metas) {
        result.validate_against(meta)?;
    }
    let (results, traces): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    write_results(&args.out, &results)?;
    if let Some(path) = &args.dump_trace {
        write_json(path, &traces)?;
    }
    let count = |s: Status| results.iter().filter(|r| r.status == s).count();
    eprintln!(
        "{} videos ({}): {} accepted, {} manual review, {} no candidates",
        results.len(),
        args.variant,
        count(Status::Accepted),
        count(Status::ManualReview),
        count(Status::NoCandidates)
    );
    for r in results.iter().filter(|r| !r.diagnostics.is_empty() && r.status != Status::Accepted) {
        eprintln!("  {}: {}", r.video_id, r.diagnostics.join("; "));
    }
    Ok(())
}

impl crate::interchange::Record for SceneSpec {
    fn validate(&self) -> Result<()> {
        SceneSpec::validate(self)
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let specs: Vec<SceneSpec> = match (&args.scenes, &args.suite) {
        (Some(path), _) => {
            let mut specs: Vec<SceneSpec> = read_json(path)?;
            if let Some(seed) = args.seed {
                for (i, s) in specs.iter_mut().enumerate() {
                    s.seed = seed.wrapping_add(i as u64);
                }
            }
            specs
        }
        (None, Some(name)) => suites::suite(name, args.count, args.seed.unwrap_or(0))?,
        (None, None) => return Err(Error::Usage("either --scenes or --suite is required".into())),
    };
    let set = SceneSet::build(&specs)?;
    export_scenes(&set, &args.out_dir)?;
    write_json(args.out_dir.join("scenes.json"), &specs)?;
    eprintln!("wrote {} scenes to {}", specs.len(), args.out_dir.display());
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let results = read_results(&args.results)?;
    let truth = read_truth(&args.truth)?;
    let total = args.total.unwrap_or(results.len());
    if total < results.len() {
        return Err(Error::Usage(format!(
            "--total {total} is smaller than the {} results",
            results.len()
        )));
    }
    let convention = if args.inclusive { Convention::Inclusive } else { Convention::Strict };
    let report = metrics_report(&results, &truth, &args.tolerances, total, convention);
    print!("{}", render_table(&report));
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    Ok(())
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Eval(a) => cmd_eval(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Usage(_)) => {
            eprintln!("graze: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("graze: {e}");
            ExitCode::FAILURE
        }
    }
}
