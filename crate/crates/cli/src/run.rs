//! Command implementations: scenario synthesis, tracking runs, and the
//! ablation grid. All artifact writes are atomic (temp file + rename) and
//! deterministic for fixed inputs and seeds.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use kinetrack::geometry::{GeometryError, Pose};
use kinetrack::metrics::{build_report, frames_to_csv, MetricsError, MetricsReport};
use kinetrack::simulation::{
    generate_scenario, resolve_model, scenario_from_jsonl, scenario_to_jsonl, ScenarioConfig,
    ScenarioPreset, SensorFrame, SimulationError,
};
use kinetrack::tracker::{
    results_to_jsonl, TrackResult, Tracker, TrackerConfig, TrackerError, Variant,
};

use crate::args::{AblateArgs, Cli, Command, SimulateArgs, TrackArgs};

/// Environment variable naming the root that relative output paths resolve
/// against.
pub const OUT_ROOT_ENV: &str = "KINETRACK_OUT";

#[derive(thiserror::Error, Debug)]
pub enum CliError {
    /// Missing or contradictory arguments: exit code 1.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Tracker(#[from] TrackerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Runtime(String),
    #[error("{failed} of {total} runs failed")]
    PartialFailure { failed: usize, total: usize },
}

impl CliError {
    /// Stable scripting contract: 0 success, 1 usage error, 2 runtime
    /// failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Track(args) => cmd_track(args),
        Command::Ablate(args) => cmd_ablate(args),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))
}

/// Resolves a relative output path against `KINETRACK_OUT` when the variable
/// is set and non-empty; absolute paths pass through untouched.
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(path),
        _ => path.to_path_buf(),
    }
}

/// Writes a file atomically: the content lands under its final name only via
/// rename, so concurrent runs and crashes never leave partial artifacts.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(parent)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn variant_label(variant: Variant) -> &'static str {
    match variant {
        Variant::Full => "full",
        Variant::NoRotation => "no-rotation",
        Variant::NoTranslation => "no-translation",
    }
}

/// Peak frame-to-frame relative speed and angular speed of the object in the
/// camera frame, from ground truth.
pub fn relative_peaks(
    frames: &[SensorFrame<f64>],
    frame_rate_hz: f64,
) -> Result<(f64, f64), CliError> {
    let mut prev: Option<Pose<f64>> = None;
    let mut speed = 0.0f64;
    let mut angular = 0.0f64;
    for frame in frames {
        let rel = frame.truth().object_in_camera()?;
        if let Some(p) = &prev {
            speed = speed.max((rel.translation - p.translation).norm() * frame_rate_hz);
            angular = angular.max(rel.rotation.geodesic_angle(&p.rotation) * frame_rate_hz);
        }
        prev = Some(rel);
    }
    Ok((speed, angular))
}

/// Builds the effective tracker configuration from optional config files,
/// a variant selection, and an optional refiner seed override.
pub fn load_tracker_config(
    config_path: Option<&Path>,
    refiner_path: Option<&Path>,
    variant: Variant,
    refiner_seed: Option<u64>,
) -> Result<TrackerConfig<f64>, CliError> {
    let mut config: TrackerConfig<f64> = match config_path {
        Some(path) => toml::from_str(&read_text(path)?)
            .map_err(|e| CliError::Runtime(format!("bad tracker config {}: {e}", path.display())))?,
        None => TrackerConfig::default(),
    };
    if let Some(path) = refiner_path {
        config.refiner = toml::from_str(&read_text(path)?)
            .map_err(|e| CliError::Runtime(format!("bad refiner config {}: {e}", path.display())))?;
    }
    if let Some(seed) = refiner_seed {
        config.refiner.seed = seed;
    }
    let config = config.with_variant(variant);
    config.validate()?;
    Ok(config)
}

/// One complete tracking run plus its accuracy report.
pub struct RunOutcome {
    pub results: Vec<TrackResult<f64>>,
    pub report: MetricsReport,
    pub mean_step_seconds: f64,
}

/// Tracks a generated sequence from its true initial pose and scores the
/// estimates against ground truth.
pub fn run_tracking(
    scenario: &ScenarioConfig,
    frames: &[SensorFrame<f64>],
    tracker_config: TrackerConfig<f64>,
) -> Result<RunOutcome, CliError> {
    if frames.len() < 2 {
        return Err(CliError::Runtime(format!(
            "scenario has {} frames; tracking needs at least 2",
            frames.len()
        )));
    }
    let model = resolve_model(&scenario.object_model)?;
    let mut tracker = Tracker::new(tracker_config, scenario.intrinsics, model.clone())?;
    let initial = frames[0].truth().object_in_camera()?;
    let results = tracker.run_sequence(frames, initial)?;

    let mut gt = Vec::with_capacity(results.len());
    let mut est = Vec::with_capacity(results.len());
    for result in &results {
        gt.push(frames[result.frame_index as usize].truth().object_in_camera()?);
        est.push(result.object_cam);
    }
    let report = build_report(&model, &gt, &est, scenario.seed, scenario.digest())?;
    let mean_step_seconds =
        results.iter().map(|r| r.step_seconds).sum::<f64>() / results.len() as f64;
    Ok(RunOutcome {
        results,
        report,
        mean_step_seconds,
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let mut config: ScenarioConfig = match (args.preset, &args.config) {
        (Some(preset), None) => ScenarioPreset::from(preset).config(),
        (None, Some(path)) => ScenarioConfig::from_toml(&read_text(path)?)?,
        _ => {
            return Err(CliError::Usage(
                "simulate needs exactly one of --preset or --config".into(),
            ))
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;

    if args.print_config {
        print!("{}", config.to_toml()?);
        return Ok(());
    }
    let out = args.out.ok_or_else(|| {
        CliError::Usage("simulate needs --out (or --print-config)".into())
    })?;
    let out = resolve_out(&out);

    let frames = generate_scenario(&config)?;
    let (speed, angular) = relative_peaks(&frames, config.frame_rate_hz)?;
    write_atomic(&out, &scenario_to_jsonl(&config, &frames)?)?;

    println!("wrote {} ({} frames)", out.display(), frames.len());
    println!("peak relative speed: {speed:.3} m/s");
    println!("peak relative angular speed: {angular:.3} rad/s");
    Ok(())
}

// ---------------------------------------------------------------------------
// track
// ---------------------------------------------------------------------------

fn cmd_track(args: TrackArgs) -> Result<(), CliError> {
    let tracker_config = load_tracker_config(
        args.config.as_deref(),
        args.refiner_config.as_deref(),
        args.variant.into(),
        args.seed,
    )?;
    if args.print_config {
        let text = toml::to_string_pretty(&tracker_config)
            .map_err(|e| CliError::Runtime(format!("cannot render config: {e}")))?;
        print!("{text}");
        return Ok(());
    }

    let scenario_path = args
        .scenario
        .ok_or_else(|| CliError::Usage("track needs --scenario".into()))?;
    let (scenario, frames) = scenario_from_jsonl(&read_text(&scenario_path)?)?;
    let outcome = run_tracking(&scenario, &frames, tracker_config)?;

    let out_dir = resolve_out(
        &args
            .out
            .ok_or_else(|| CliError::Usage("track needs --out".into()))?,
    );
    let results_text = results_to_jsonl(&outcome.results)
        .map_err(|e| CliError::Runtime(format!("cannot serialize results: {e}")))?;
    let report_text = serde_json::to_string_pretty(&outcome.report)
        .map_err(|e| CliError::Runtime(format!("cannot serialize report: {e}")))?;
    write_atomic(&out_dir.join("results.jsonl"), &results_text)?;
    write_atomic(&out_dir.join("report.json"), &format!("{report_text}\n"))?;
    write_atomic(&out_dir.join("frames.csv"), &frames_to_csv(&outcome.report.frames))?;

    println!("frames tracked: {}", outcome.results.len());
    println!("auc_add: {:.4}", outcome.report.auc_add);
    println!("auc_adds: {:.4}", outcome.report.auc_adds);
    println!("success_rate: {:.4}", outcome.report.success_rate);
    println!("mean frame time: {:.6} s", outcome.mean_step_seconds);
    println!("wrote {}", out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

/// Declarative description of an ablation sweep. Input paths are relative to
/// the manifest's directory; `out_dir` resolves like any other output path.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Preset name (`slow`, `fast`, `stress`) or scenario config TOML path.
    pub scenario: String,
    /// Scenario RNG seeds; one tracking run per (variant, seed) cell.
    pub seeds: Vec<u64>,
    /// Pipeline variants to compare.
    pub variants: Vec<Variant>,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub tracker_config: Option<PathBuf>,
    #[serde(default)]
    pub refiner_config: Option<PathBuf>,
}

impl RunManifest {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.seeds.is_empty() {
            return Err(CliError::Runtime("manifest needs at least one seed".into()));
        }
        if self.variants.is_empty() {
            return Err(CliError::Runtime(
                "manifest needs at least one variant".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, serde::Serialize)]
struct AblationRow {
    variant: Variant,
    seed: u64,
    auc_add: f64,
    auc_adds: f64,
    success_rate: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
struct VariantSummary {
    variant: Variant,
    runs: usize,
    median_auc_add: Option<f64>,
    median_auc_adds: Option<f64>,
    median_success_rate: Option<f64>,
}

#[derive(Clone, Debug, serde::Serialize)]
struct AblationSummary {
    total_runs: usize,
    failed_runs: usize,
    medians: Vec<VariantSummary>,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 0 {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

fn summarize_variant(variant: Variant, rows: &[AblationRow]) -> VariantSummary {
    let mut auc_add: Vec<f64> = Vec::new();
    let mut auc_adds: Vec<f64> = Vec::new();
    let mut success: Vec<f64> = Vec::new();
    for row in rows.iter().filter(|r| r.variant == variant) {
        auc_add.push(row.auc_add);
        auc_adds.push(row.auc_adds);
        success.push(row.success_rate);
    }
    VariantSummary {
        variant,
        runs: auc_add.len(),
        median_auc_add: median(&mut auc_add),
        median_auc_adds: median(&mut auc_adds),
        median_success_rate: median(&mut success),
    }
}

fn resolve_scenario_source(source: &str, base_dir: &Path) -> Result<ScenarioConfig, CliError> {
    match source {
        "slow" => Ok(ScenarioPreset::Slow.config()),
        "fast" => Ok(ScenarioPreset::Fast.config()),
        "stress" => Ok(ScenarioPreset::Stress.config()),
        path => Ok(ScenarioConfig::from_toml(&read_text(&base_dir.join(path))?)?),
    }
}

fn cmd_ablate(args: AblateArgs) -> Result<(), CliError> {
    let manifest: RunManifest = toml::from_str(&read_text(&args.manifest)?)
        .map_err(|e| CliError::Runtime(format!("bad manifest {}: {e}", args.manifest.display())))?;
    manifest.validate()?;
    let base_dir = args
        .manifest
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();

    let scenario_base = resolve_scenario_source(&manifest.scenario, &base_dir)?;
    let tracker_base = load_tracker_config(
        manifest.tracker_config.as_ref().map(|p| base_dir.join(p)).as_deref(),
        manifest.refiner_config.as_ref().map(|p| base_dir.join(p)).as_deref(),
        Variant::Full,
        None,
    )?;
    let out_dir = resolve_out(args.out.as_ref().unwrap_or(&manifest.out_dir));

    let cells: Vec<(Variant, u64)> = manifest
        .variants
        .iter()
        .flat_map(|v| manifest.seeds.iter().map(move |s| (*v, *s)))
        .collect();

    // Cells are independent; results come back in cell order regardless of
    // scheduling, so artifacts stay deterministic.
    let outcomes: Vec<Result<AblationRow, (Variant, u64, String)>> = cells
        .par_iter()
        .map(|(variant, seed)| {
            let mut scenario = scenario_base.clone();
            scenario.seed = *seed;
            let frames =
                generate_scenario(&scenario).map_err(|e| (*variant, *seed, e.to_string()))?;
            let config = tracker_base.clone().with_variant(*variant);
            let outcome = run_tracking(&scenario, &frames, config)
                .map_err(|e| (*variant, *seed, e.to_string()))?;
            Ok(AblationRow {
                variant: *variant,
                seed: *seed,
                auc_add: outcome.report.auc_add,
                auc_adds: outcome.report.auc_adds,
                success_rate: outcome.report.success_rate,
            })
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(failure) => failures.push(failure),
        }
    }

    let mut csv = String::from("variant,seed,auc_add,auc_adds,success_rate\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            variant_label(row.variant),
            row.seed,
            row.auc_add,
            row.auc_adds,
            row.success_rate
        ));
    }
    write_atomic(&out_dir.join("ablation.csv"), &csv)?;

    let summary = AblationSummary {
        total_runs: cells.len(),
        failed_runs: failures.len(),
        medians: manifest
            .variants
            .iter()
            .map(|v| summarize_variant(*v, &rows))
            .collect(),
    };
    let summary_text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Runtime(format!("cannot serialize summary: {e}")))?;
    write_atomic(&out_dir.join("summary.json"), &format!("{summary_text}\n"))?;

    println!(
        "{:<16} {:>5} {:>12} {:>13} {:>12}",
        "variant", "runs", "med_auc_add", "med_auc_adds", "med_success"
    );
    let fmt = |v: Option<f64>| match v {
        Some(x) => format!("{x:.3}"),
        None => "-".into(),
    };
    for m in &summary.medians {
        println!(
            "{:<16} {:>5} {:>12} {:>13} {:>12}",
            variant_label(m.variant),
            m.runs,
            fmt(m.median_auc_add),
            fmt(m.median_auc_adds),
            fmt(m.median_success_rate)
        );
    }

    if !failures.is_empty() {
        let mut report = String::new();
        for (variant, seed, error) in &failures {
            report.push_str(&format!(
                "variant={} seed={seed}: {error}\n",
                variant_label(*variant)
            ));
        }
        write_atomic(&out_dir.join("failures.txt"), &report)?;
        eprint!("{report}");
        return Err(CliError::PartialFailure {
            failed: failures.len(),
            total: cells.len(),
        });
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}
