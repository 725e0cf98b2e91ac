//! Command-line surface. Parsing is separated from execution so the
//! integration tests can exercise both through the library.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kinetrack::simulation::ScenarioPreset;
use kinetrack::tracker::Variant;

/// Pose-tracking toolkit: scenario synthesis, tracking runs, and ablation
/// comparisons.
///
/// Relative `--out` paths resolve against the `KINETRACK_OUT` environment
/// variable when it is set, otherwise against the working directory.
#[derive(Parser, Debug)]
#[command(name = "kinetrack", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic sensor sequence and write it as JSON lines.
    Simulate(SimulateArgs),
    /// Track an object through a recorded sequence and report accuracy.
    Track(TrackArgs),
    /// Run the (variant x seed) comparison grid described by a manifest.
    Ablate(AblateArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Built-in scenario preset.
    #[arg(long, value_enum, conflicts_with = "config")]
    pub preset: Option<PresetArg>,
    /// Scenario configuration file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the scenario RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Destination file for the sequence (JSON lines).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the resolved scenario configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Args, Debug)]
pub struct TrackArgs {
    /// Input sequence produced by `simulate` (JSON lines).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Tracker configuration file (TOML). Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Refinement-stage configuration file (TOML); overrides the tracker
    /// config's refiner section.
    #[arg(long)]
    pub refiner_config: Option<PathBuf>,
    /// Pipeline variant to run.
    #[arg(long, value_enum, default_value = "full")]
    pub variant: VariantArg,
    /// Override the refinement-stage RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for results.jsonl, report.json, and frames.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the resolved tracker configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    /// Run manifest (TOML): scenario, seeds, variants, output directory.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Override the manifest's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetArg {
    Slow,
    Fast,
    Stress,
}

impl From<PresetArg> for ScenarioPreset {
    fn from(arg: PresetArg) -> Self {
        match arg {
            PresetArg::Slow => ScenarioPreset::Slow,
            PresetArg::Fast => ScenarioPreset::Fast,
            PresetArg::Stress => ScenarioPreset::Stress,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    Full,
    NoRotation,
    NoTranslation,
}

impl From<VariantArg> for Variant {
    fn from(arg: VariantArg) -> Self {
        match arg {
            VariantArg::Full => Variant::Full,
            VariantArg::NoRotation => Variant::NoRotation,
            VariantArg::NoTranslation => Variant::NoTranslation,
        }
    }
}
