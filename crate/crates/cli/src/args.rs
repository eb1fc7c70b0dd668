use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "polyring",
    version,
    about = "Masses of nested regular-polygon relative equilibria"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Every command, also readable from a JSON document tagged by `command`.
#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Solve for the per-polygon masses of a stack.
    Solve(SolveArgs),
    /// Evaluate a sign or figure scan over a grid of inner radii.
    #[command(subcommand)]
    Scan(ScanKind),
    /// Certify that the series coefficients of f_p are nonpositive.
    Certify(CertifyArgs),
    /// Integrate the rotating solution and report drift.
    Simulate(SimulateArgs),
    /// Determinants of every mode matrix.
    Spectrum(SpectrumArgs),
    /// Run a command described by a JSON document.
    #[serde(skip)]
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct StackArgs {
    /// Vertices per polygon.
    #[arg(long)]
    pub n: usize,
    /// Potential exponent (2 for vortices, 3 for gravitation).
    #[arg(long)]
    pub a: f64,
    /// Comma-separated radii, one per polygon.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub radii: Vec<f64>,
    /// Comma-separated heights; omit for a planar stack.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub heights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub stack: StackArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: f64,
}

/// Inclusive grid `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(format!("expected start:stop:count, got {s:?}"));
        };
        let grid = Grid {
            start: start
                .parse()
                .map_err(|e| format!("bad grid start {start:?}: {e}"))?,
            stop: stop
                .parse()
                .map_err(|e| format!("bad grid stop {stop:?}: {e}"))?,
            count: count
                .parse()
                .map_err(|e| format!("bad grid count {count:?}: {e}"))?,
        };
        grid.validate()?;
        Ok(grid)
    }
}

impl Grid {
    pub fn validate(&self) -> Result<(), String> {
        if self.count < 2 {
            return Err(format!("grid needs at least 2 points, got {}", self.count));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(format!(
                "grid needs finite start < stop, got {}:{}",
                self.start, self.stop
            ));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ScanKind {
    /// Two-polygon masses across the inner radius, with the sign threshold.
    Sign(SignScanArgs),
    /// Secondary-diagonal products of a lifted two-polygon stack.
    Figure(FigureScanArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SignScanArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub a: f64,
    /// Outer radius.
    #[arg(long, default_value_t = 1.0)]
    pub r2: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub nu: f64,
    /// Inner radii as start:stop:count.
    #[arg(long, default_value = "0.005:0.995:199")]
    pub grid: Grid,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    #[serde(default = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FigureScanArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 3.0)]
    pub a: f64,
    #[arg(long, default_value_t = 3.0)]
    pub r2: f64,
    #[arg(long, default_value_t = 0.25, allow_hyphen_values = true)]
    pub h1: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub h2: f64,
    /// Mode of the first product.
    #[arg(long, default_value_t = 1)]
    pub p_f: usize,
    /// Mode of the second product.
    #[arg(long, default_value_t = 3)]
    pub p_g: usize,
    #[arg(long, default_value = "0.01:6.6:660")]
    pub grid: Grid,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    #[serde(default = "csv")]
    pub format: Format,
}

fn csv() -> Format {
    Format::Csv
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub p: i64,
    /// Largest coefficient index.
    #[arg(long, default_value_t = 100)]
    pub order: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Per-polygon masses; solved from the stack when omitted.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "from_solution"
    )]
    pub masses: Option<Vec<f64>>,
    /// JSON document written by `solve`; supplies masses, nu and missing stack flags.
    #[arg(long)]
    pub from_solution: Option<PathBuf>,
    /// Integration horizon in rotation periods.
    #[arg(long, default_value_t = 2.0)]
    #[serde(default = "two")]
    pub periods: f64,
    /// Time step; defaults to period / steps-per-period.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 20_000)]
    #[serde(default = "steps_per_period")]
    pub steps_per_period: usize,
    /// Keep every stride-th step in the trajectory.
    #[arg(long, default_value_t = 100)]
    #[serde(default = "stride")]
    pub stride: usize,
    /// Trajectory CSV path (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Drift report JSON path.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn two() -> f64 {
    2.0
}

fn steps_per_period() -> usize {
    20_000
}

fn stride() -> usize {
    100
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub stack: StackArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON document with a `command` field and that command's parameters.
    pub config: PathBuf,
}
