use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "hpot", version, about = "Potential theory on the Korányi ball of the Heisenberg group")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check solvability, then evaluate the solution.
    Solve(SolveArgs),
    /// Evaluate the solvability conditions only (exit 2 when they fail).
    Check(CheckArgs),
    /// Tabulate a kernel on a polar grid of the meridian half-plane.
    Kernel(KernelArgs),
    /// Compute and persist the boundary calibration constant.
    Calibrate(CalibrateArgs),
    /// Solve, then report PDE and boundary residuals at random probes.
    Verify(VerifyArgs),
    /// Dump quadrature nodes and weights.
    Grid(GridArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Volume nodes per coordinate (overrides the spec).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Boundary nodes in ψ (overrides the spec).
    #[arg(long)]
    pub boundary_resolution: Option<usize>,
    /// Gauge radius of the caps excised around the characteristic points.
    #[arg(long)]
    pub delta_cap: Option<f64>,
    /// Directory for cached grids and calibration constants.
    #[arg(long)]
    pub grid_cache: Option<PathBuf>,
    /// Worker threads for matrix fills.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Problem {
    /// Problem spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Evaluate through the two-stage composition instead of fused kernels.
    #[arg(long)]
    pub composition: bool,
    /// Dirichlet–Neumann: pair the Poisson terms with the Neumann data.
    #[arg(long)]
    pub strict: bool,
    /// Solvability tolerance.
    #[arg(long, default_value_t = hpot::solver::DEFAULT_TAU)]
    pub tau: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Solution CSV: rho,psi,s,t,u.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// (ρ, ψ, u) triples for external plotting.
    #[arg(long)]
    pub emit_plot_data: Option<PathBuf>,
    /// Solve even when a solvability condition fails.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CheckArgs {
    #[command(flatten)]
    pub problem: Problem,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: Problem,
    /// Number of interior (and boundary) probes.
    #[arg(long, default_value_t = 200)]
    pub probes: usize,
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum KernelType {
    Fundamental,
    Green,
    Poisson,
    Neumann,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct KernelArgs {
    #[arg(long = "type", value_enum)]
    pub kind: KernelType,
    /// Pole η as a comma-separated chart x1..xn,y1..yn,t.
    #[arg(long, allow_hyphen_values = true)]
    pub eta: String,
    /// Evaluate the literal kernel instead of its circle mean.
    #[arg(long)]
    pub raw: bool,
    #[arg(long, default_value_t = 32)]
    pub ntheta: usize,
    #[arg(long, default_value_t = 0)]
    pub series_kmax: usize,
    #[arg(long, default_value_t = 0)]
    pub series_mmax: usize,
    /// Coefficient table: inline JSON or a path to one.
    #[arg(long)]
    pub series_coeffs: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub series_b0: f64,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CalibrateArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum GridWhich {
    Volume,
    Boundary,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    Meridian,
    Full,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value_t = GridWhich::Volume)]
    pub which: GridWhich,
    #[arg(long, value_enum, default_value_t = Layout::Meridian)]
    pub layout: Layout,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Nodes CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}
