//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::experiment::Method;
use reclasso::datagen::SimConfig;

#[derive(Debug, Parser)]
#[command(
    name = "reclasso",
    version,
    about = "Online lasso AR-X forecasting: homotopy updates, penalty adaptation, and benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic sparse AR-X panel and write it as CSV
    Simulate(SimulateArgs),
    /// Select the lasso penalty by rolling validation and print the MSFE curve
    Tune(TuneArgs),
    /// Run forecasting methods over the evaluation period and report MSFE
    Evaluate(EvaluateArgs),
    /// Time one rolling-validation pass against the online penalty rules
    Bench(BenchArgs),
}

/// Simulation parameters shared by every subcommand that can synthesize
/// its data. The lag orders come from the subcommand's `--p`/`--s`: the
/// generator and the fitted model share them.
#[derive(Debug, Args)]
pub struct SimArgs {
    /// Number of exogenous series in the simulated panel
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Length of the simulated series
    #[arg(long = "t-len", default_value_t = 250)]
    pub t_len: usize,
    /// Fraction of nonzero generator coefficients
    #[arg(long, default_value_t = 0.1)]
    pub density: f64,
    /// Innovation standard deviation of the target equation
    #[arg(long = "noise-sd", default_value_t = 1.0)]
    pub noise_sd: f64,
    /// Stationarity bound on the companion spectral radius
    #[arg(long = "spectral-cap", default_value_t = 0.95)]
    pub spectral_cap: f64,
}

impl SimArgs {
    pub fn to_config(&self, p: usize, s: usize, seed: u64) -> SimConfig {
        let mut cfg = SimConfig::new(self.k, p, s, self.t_len);
        cfg.density = self.density;
        cfg.noise_sd = self.noise_sd;
        cfg.spectral_cap = self.spectral_cap;
        cfg.seed = seed;
        cfg
    }
}

/// Input-data options shared by `tune` and `evaluate`.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV panel to load (header row, time column first, optional
    /// transform-code row); omitted means simulate instead
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Target column name (default: the first data column)
    #[arg(long)]
    pub target: Option<String>,
    /// Aggregate monthly columns to quarterly 3-month means before the
    /// stationarity transforms
    #[arg(long)]
    pub quarterly: bool,
    /// Standardize every series using statistics from the
    /// initialization+training period (default: true for --data, false
    /// for simulated sources)
    #[arg(long)]
    pub normalize: Option<bool>,
}

/// Penalty-handling rules selectable with `--rule`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Static,
    RollingWindow,
    Gradient,
    Newton,
}

impl RuleArg {
    pub fn method(self) -> Method {
        match self {
            RuleArg::Static => Method::Static,
            RuleArg::RollingWindow => Method::RollingWindow,
            RuleArg::Gradient => Method::Gradient,
            RuleArg::Newton => Method::Newton,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Own-lag order of the generator
    #[arg(long, default_value_t = 12)]
    pub p: usize,
    /// Exogenous lag order of the generator
    #[arg(long, default_value_t = 12)]
    pub s: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (standard output when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Own-lag order of the fitted model
    #[arg(long, default_value_t = 12)]
    pub p: usize,
    /// Exogenous lag order of the fitted model
    #[arg(long, default_value_t = 12)]
    pub s: usize,
    /// Number of penalties in the log-spaced grid
    #[arg(long = "grid-size", default_value_t = 50)]
    pub grid_size: usize,
    /// RNG seed (simulated sources)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of the series used for initialization+training
    /// (default: the first two thirds)
    #[arg(long = "train-frac")]
    pub train_frac: Option<f64>,
    /// Write the full report as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the MSFE curve as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Own-lag order of the fitted model
    #[arg(long, default_value_t = 12)]
    pub p: usize,
    /// Exogenous lag order of the fitted model
    #[arg(long, default_value_t = 12)]
    pub s: usize,
    /// Number of penalties in the log-spaced grid
    #[arg(long = "grid-size", default_value_t = 50)]
    pub grid_size: usize,
    /// Learning rate of the gradient rule
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Penalty-handling rule to evaluate; repeatable (default: all four).
    /// The static lasso always runs — it anchors the relative MSFE.
    #[arg(long = "rule", value_enum)]
    pub rule: Vec<RuleArg>,
    /// Also run the mean, random-walk, AIC, and BIC baselines
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub baselines: bool,
    /// Independent replications, seeded seed, seed+1, ... (simulated
    /// sources only)
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Base RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of the series used for initialization+training
    /// (default: the first two thirds)
    #[arg(long = "train-frac")]
    pub train_frac: Option<f64>,
    /// Write the full report (config, summaries, trajectories) as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the per-method summary table as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Own-lag order
    #[arg(long, default_value_t = 12)]
    pub p: usize,
    /// Exogenous lag order
    #[arg(long, default_value_t = 12)]
    pub s: usize,
    /// Number of penalties in the log-spaced grid
    #[arg(long = "grid-size", default_value_t = 50)]
    pub grid_size: usize,
    /// Learning rate of the gradient rule
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Observations each timed pass processes
    #[arg(long, default_value_t = 76)]
    pub window: usize,
    /// Timed iterations per method
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Warmup iterations excluded from the statistics (minimum 3)
    #[arg(long, default_value_t = 3)]
    pub warmup: usize,
    /// Write the timing table as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the timing table as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
