use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use focusplan::Distance;

#[derive(Debug, Parser)]
#[command(
    name = "focusplan",
    version,
    about = "Plan autofocus and focus-bracketing lens positions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Slice the focus range and print the lens-position table.
    Plan(PlanArgs),
    /// Plan a focus bracket over a finite range (requires --far-mm).
    Bracket(PlanArgs),
    /// Check a plan file for gap-free coverage with the blur-circle model.
    Verify(VerifyArgs),
    /// Run a coarse-plus-fine contrast AF search against a synthetic scene.
    Simulate(SimulateArgs),
    /// Emit per-slice blur curves as CSV for external plotting.
    Plotdata(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum DirectionArg {
    #[default]
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Lens parameters. Every length is in millimeters.
#[derive(Debug, Clone, Default, Args)]
pub struct LensArgs {
    /// JSON module configuration; flags given on the command line win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[arg(long, value_name = "MM")]
    pub focal_mm: Option<f64>,

    /// f-number.
    #[arg(long, value_name = "N")]
    pub aperture: Option<f64>,

    /// Circle of confusion.
    #[arg(long, value_name = "MM", conflicts_with_all = ["sensor_diagonal_mm", "k"])]
    pub coc_mm: Option<f64>,

    /// Sensor diagonal; the circle of confusion becomes diagonal / k.
    #[arg(long, value_name = "MM", requires = "k")]
    pub sensor_diagonal_mm: Option<f64>,

    /// Viewing constant dividing the sensor diagonal (commonly 1730).
    #[arg(long, requires = "sensor_diagonal_mm")]
    pub k: Option<f64>,

    /// Practical nearest focus distance.
    #[arg(long, value_name = "MM")]
    pub near_mm: Option<f64>,

    /// Far end of the range to cover, or `inf`.
    #[arg(long, value_name = "MM")]
    pub far_mm: Option<Distance>,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub lens: LensArgs,

    #[arg(long, value_enum, default_value_t)]
    pub direction: DirectionArg,

    #[arg(long, value_enum, default_value_t)]
    pub format: Format,

    /// Plan every `*.json` module config in this directory.
    #[arg(
        long,
        value_name = "DIR",
        requires = "out_dir",
        conflicts_with = "config"
    )]
    pub config_dir: Option<PathBuf>,

    /// Where batch mode writes one plan per config.
    #[arg(long, value_name = "DIR", requires = "config_dir")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Plan file written by `plan` (JSON, or CSV together with lens flags).
    pub plan: PathBuf,

    #[arg(long, default_value_t = 100)]
    pub samples_per_slice: usize,

    #[command(flatten)]
    pub lens: LensArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub lens: LensArgs,

    #[arg(long, value_enum, default_value_t)]
    pub direction: DirectionArg,

    /// Actuator calibration JSON; defaults to a 10-bit span over the plan.
    #[arg(long, value_name = "PATH")]
    pub calibration: Option<PathBuf>,

    /// Ground-truth object distance.
    #[arg(long, value_name = "MM")]
    pub distance_mm: f64,

    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Fine-search measurement budget.
    #[arg(long, default_value_t = 30)]
    pub max_evals: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub lens: LensArgs,

    #[arg(long, value_enum, default_value_t)]
    pub direction: DirectionArg,

    #[arg(long, default_value_t = 20)]
    pub samples_per_slice: usize,
}
