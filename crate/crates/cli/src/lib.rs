//! Command-line front end: alarm-limit calibration, detection over CSV
//! streams, simulation tables and evaluation of the null laws.

pub mod calibrate;
pub mod config;
pub mod detect;
pub mod dist;
pub mod error;
pub mod output;
pub mod simulate;
pub mod stream;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "srcusum",
    version,
    about = "Common-change detection across parallel Gaussian streams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the alarm limit B for a target in-control run length
    Calibrate(CalibrateArgs),
    /// Run the detector over a CSV stream and isolate the changed panels
    Detect(DetectArgs),
    /// Run Monte Carlo scenarios and write the metrics tables
    Simulate(SimulateArgs),
    /// Evaluate a null-law function on a grid
    Dist(DistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Detector parameters; flags override values from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct DetectorFlags {
    /// TOML or JSON file with delta, n_panels, alarm_limit, target_arl0, alpha
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reference shift δ
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Number of panels N
    #[arg(long)]
    pub panels: Option<usize>,
    /// Target in-control average run length
    #[arg(long, allow_negative_numbers = true)]
    pub arl0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub detector: DetectorFlags,
    /// Output file (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// CSV stream, one row per time step and one column per panel ("-" for stdin)
    pub input: PathBuf,
    #[command(flatten)]
    pub detector: DetectorFlags,
    /// Alarm limit B; takes precedence over --arl0
    #[arg(long, allow_negative_numbers = true)]
    pub limit: Option<f64>,
    /// FDR level for isolation
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Output JSON file (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML or JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Replace the seed of every scenario
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; with --format csv a JSON file with the same stem is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Print the expanded scenarios as JSON and exit
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Function name; an unknown name lists the available ones
    pub function: String,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub delta: f64,
    /// Time grid: a value, a comma list, or start:stop:step
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Level grid: a value, a comma list, or start:stop:step
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Step-count grid for ig_overshoot_cdf
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// Output file (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate(a) => calibrate::run(&a),
        Command::Detect(a) => detect::run(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Dist(a) => dist::run(&a),
    }
}
