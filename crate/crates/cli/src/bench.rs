//! Wall-clock comparison of one full rolling-validation pass against the
//! online penalty rules processing the same observations.
//!
//! Both sides start from raw data: the rolling pass re-fits and rolls one
//! model per grid penalty across the window, while each online rule fits
//! once and then folds the window in observation by observation. The
//! starting penalty for the online rules is selected outside the timed
//! region, by the same rolling validation being measured.

use std::hint::black_box;
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;
use crate::experiment::{anchored_grid, RunConfig};
use reclasso::datagen::{simulate_arx, SimConfig};
use reclasso::tuning::{online_evaluate, rolling_validate, SplitConfig, UpdateRule};

/// Configuration of a `bench` run.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Data-generating process; its `p`/`s` are also the fitted orders.
    pub sim: SimConfig,
    pub grid_size: usize,
    pub eta: f64,
    /// Number of observations each timed pass processes.
    pub window: usize,
    /// Timed iterations per method.
    pub iterations: usize,
    /// Untimed iterations run first and discarded.
    pub warmup: usize,
}

impl BenchConfig {
    pub fn new(sim: SimConfig) -> Self {
        BenchConfig {
            sim,
            grid_size: 50,
            eta: 0.1,
            window: 76,
            iterations: 100,
            warmup: 3,
        }
    }
}

/// Distribution of one method's wall-clock times, in milliseconds.
#[derive(Debug, Clone, Serialize)]
pub struct TimingSummary {
    pub label: String,
    pub iterations: usize,
    pub min_ms: f64,
    pub q1_ms: f64,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub q3_ms: f64,
    pub max_ms: f64,
}

/// Linear-interpolation quantile of an ascending-sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl TimingSummary {
    fn from_samples(label: &str, mut samples: Vec<f64>) -> TimingSummary {
        assert!(!samples.is_empty());
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
        TimingSummary {
            label: label.to_owned(),
            iterations: samples.len(),
            min_ms: samples[0],
            q1_ms: quantile(&samples, 0.25),
            mean_ms: samples.iter().sum::<f64>() / samples.len() as f64,
            median_ms: quantile(&samples, 0.5),
            q3_ms: quantile(&samples, 0.75),
            max_ms: samples[samples.len() - 1],
        }
    }
}

/// The benchmark's result rows plus the headline ratios.
#[derive(Debug, Clone, Serialize)]
pub struct TimingTable {
    pub window: usize,
    pub iterations: usize,
    pub warmup: usize,
    /// Starting penalty handed to the online rules.
    pub lambda_init: f64,
    pub rows: Vec<TimingSummary>,
    /// Rolling mean time over the gradient rule's mean time.
    pub speedup_gradient: f64,
    /// Rolling mean time over the Newton rule's mean time.
    pub speedup_newton: f64,
}

/// A bench report: the configuration echo plus the timing table.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub config: RunConfig,
    pub timing: TimingTable,
}

fn time_runs<F>(iterations: usize, warmup: usize, mut work: F) -> Result<Vec<f64>, CliError>
where
    F: FnMut() -> Result<(), CliError>,
{
    for _ in 0..warmup {
        work()?;
    }
    let mut samples = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let start = Instant::now();
        work()?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(samples)
}

/// Runs the benchmark: simulate once, select the penalty once, then time
/// (a) full rolling-validation passes and (b) each online rule over the
/// identical window of observations.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, CliError> {
    if cfg.iterations == 0 {
        return Err(CliError::Usage("--iters must be at least 1".to_owned()));
    }
    if cfg.warmup < 3 {
        return Err(CliError::Usage(format!(
            "--warmup must be at least 3, got {}",
            cfg.warmup
        )));
    }
    if cfg.window == 0 {
        return Err(CliError::Usage("--window must be at least 1".to_owned()));
    }

    let (series, _) = simulate_arx(&cfg.sim)?;
    let t_len = series.len();
    let (p, s) = (cfg.sim.p, cfg.sim.s);
    let t1 = t_len / 3;
    let t2 = t1 + cfg.window;
    if t2 > t_len {
        return Err(CliError::Usage(format!(
            "window {} does not fit: the series has {} observations past the initialization \
             period ending at {t1}",
            cfg.window,
            t_len - t1
        )));
    }
    if t1 / 2 <= p.max(s) {
        return Err(CliError::Usage(format!(
            "series of length {t_len} is too short to initialize lag orders ({p}, {s})"
        )));
    }
    let split = SplitConfig::new(t1, t2)?;
    let grid = anchored_grid(&series, p, s, t1, cfg.grid_size)?;

    // Selection runs outside the timed region; every method then starts
    // from this penalty.
    let lambda0 = rolling_validate(&series, p, s, &grid, &split)?.selected;

    // The online rules see exactly the window's observations: evaluation
    // covers [t1, t2) of the truncated series.
    let head = series.prefix(t2);
    let online_split = SplitConfig::new(t1 / 2, t1)?;
    let probe = online_evaluate(&head, p, s, UpdateRule::Newton, lambda0, &online_split)?;
    debug_assert_eq!(probe.len(), cfg.window);

    let rolling = time_runs(cfg.iterations, cfg.warmup, || {
        let out = rolling_validate(&series, p, s, &grid, &split)?;
        black_box(out.selected);
        Ok(())
    })?;
    let gradient = time_runs(cfg.iterations, cfg.warmup, || {
        let out = online_evaluate(
            &head,
            p,
            s,
            UpdateRule::Gradient { eta: cfg.eta },
            lambda0,
            &online_split,
        )?;
        black_box(out.msfe());
        Ok(())
    })?;
    let newton = time_runs(cfg.iterations, cfg.warmup, || {
        let out = online_evaluate(&head, p, s, UpdateRule::Newton, lambda0, &online_split)?;
        black_box(out.msfe());
        Ok(())
    })?;

    let rows = vec![
        TimingSummary::from_samples("rolling-validation", rolling),
        TimingSummary::from_samples("online-gradient", gradient),
        TimingSummary::from_samples("online-newton", newton),
    ];
    let timing = TimingTable {
        window: cfg.window,
        iterations: cfg.iterations,
        warmup: cfg.warmup,
        lambda_init: lambda0,
        speedup_gradient: rows[0].mean_ms / rows[1].mean_ms,
        speedup_newton: rows[0].mean_ms / rows[2].mean_ms,
        rows,
    };
    Ok(BenchReport {
        config: RunConfig {
            source: "simulated".to_owned(),
            k: cfg.sim.k,
            t_len,
            p,
            s,
            t1,
            t2,
            grid_size: cfg.grid_size,
            eta: Some(cfg.eta),
            reps: 1,
            seed: cfg.sim.seed,
            normalized: false,
            methods: Vec::new(),
        },
        timing,
    })
}
