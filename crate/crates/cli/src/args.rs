use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Classify,
    Solve,
    Scan,
    Constants,
    Density,
    Mc,
    Reduce,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryArg {
    Real,
    Complex,
}

/// Vector Dyson equation lab: solve `-1/m = z + S m`, classify the variance
/// profile and measure the singularity at `z = 0`.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "vde", version, about)]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,
    /// JSON profile: `{"matrix": [[...]], "n": .., "N": ..}`.
    #[arg(long)]
    #[serde(skip)]
    pub profile: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,

    /// Ray angle in radians, in `(0, pi)`.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub ray: f64,
    #[arg(long, default_value_t = 1e-1)]
    pub rmax: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub rmin: f64,
    /// Radii per decade.
    #[arg(long, default_value_t = 8)]
    pub ppd: usize,

    /// Real part of `z` for `solve` and `reduce`.
    #[arg(long, default_value_t = 0.0)]
    pub energy: f64,
    /// Imaginary part of `z`; defaults to 1e-6 for `solve`, 1e-5 for `reduce`.
    #[arg(long)]
    pub eta: Option<f64>,

    /// Comma-separated descending `eta` values.
    #[arg(long, value_delimiter = ',')]
    pub eta_schedule: Option<Vec<f64>>,
    /// Energy grid as `lo:hi:count`; the default mixes a uniform grid with
    /// log-spaced points near zero.
    #[arg(long)]
    pub egrid: Option<String>,
    /// Divergence fit window `lo,hi` in `|E|`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub window: Option<Vec<f64>>,

    /// Inner block sizes, comma-separated.
    #[arg(long = "N", value_delimiter = ',')]
    pub inner: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = SymmetryArg::Real)]
    pub symmetry: SymmetryArg,
    /// Also write the sampled spectra of `mc` here.
    #[arg(long)]
    #[serde(skip)]
    pub spectra: Option<PathBuf>,

    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: usize,
}
