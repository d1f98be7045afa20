//! Experiment orchestration: builds or loads the data, selects a penalty
//! by rolling validation, runs every requested forecasting method over the
//! evaluation period, and assembles a reproducible report.
//!
//! Replications run sequentially with per-replication seeds
//! `base_seed + index`, and methods are emitted in a fixed canonical order,
//! so a report is a pure function of its configuration.

use std::fmt;

use serde::Serialize;

use crate::bench::TimingTable;
use crate::error::CliError;
use crate::ingest;
use reclasso::arx::{
    build_lag_design, fit_ols, ic_lag_select, random_walk_forecast, sample_mean_forecast,
    InfoCriterion, SeriesSet,
};
use reclasso::datagen::{simulate_arx, SimConfig};
use reclasso::lasso::lambda_max;
use reclasso::tuning::{
    online_evaluate, rolling_validate, rolling_window_evaluate, PenaltyGrid, PenaltyTrajectory,
    SplitConfig, UpdateRule,
};

/// Forecasting methods, in the canonical order reports use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Lasso AR-X at the validated penalty, held fixed.
    Static,
    /// Lasso AR-X re-selecting the penalty from the grid each step over a
    /// trailing window.
    RollingWindow,
    /// Lasso AR-X with multiplicative gradient steps on the penalty.
    Gradient,
    /// Lasso AR-X with guarded Newton steps on the penalty.
    Newton,
    /// Expanding sample mean of the target.
    Mean,
    /// Last observed value.
    RandomWalk,
    /// OLS AR-X with lag orders chosen by AIC on the pre-evaluation data.
    Aic,
    /// OLS AR-X with lag orders chosen by BIC on the pre-evaluation data.
    Bic,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Static,
        Method::RollingWindow,
        Method::Gradient,
        Method::Newton,
        Method::Mean,
        Method::RandomWalk,
        Method::Aic,
        Method::Bic,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Static => "static",
            Method::RollingWindow => "rolling-window",
            Method::Gradient => "gradient",
            Method::Newton => "newton",
            Method::Mean => "mean",
            Method::RandomWalk => "random-walk",
            Method::Aic => "aic",
            Method::Bic => "bic",
        }
    }

    fn rank(&self) -> usize {
        Method::ALL
            .iter()
            .position(|m| m == self)
            .expect("method listed in ALL")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Deduplicates and orders the requested methods, always including the
/// static lasso: it is the denominator of every relative MSFE.
pub fn canonical_methods(requested: &[Method]) -> Vec<Method> {
    let mut wanted = [false; Method::ALL.len()];
    wanted[Method::Static.rank()] = true;
    for m in requested {
        wanted[m.rank()] = true;
    }
    Method::ALL
        .iter()
        .copied()
        .filter(|m| wanted[m.rank()])
        .collect()
}

/// Where the series comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    /// Fresh simulation per replication; the config's seed field is
    /// replaced by `base_seed + replication_index`.
    Simulate(SimConfig),
    /// A fixed series (loaded from a file); replication is meaningless.
    Loaded { series: SeriesSet<f64>, label: String },
}

/// Full configuration of an `evaluate` run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub p: usize,
    pub s: usize,
    pub grid_size: usize,
    pub eta: f64,
    pub methods: Vec<Method>,
    pub reps: usize,
    pub seed: u64,
    pub train_frac: Option<f64>,
    pub normalize: bool,
}

/// Echo of the parameters a report was produced under.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub source: String,
    pub k: usize,
    pub t_len: usize,
    pub p: usize,
    pub s: usize,
    pub t1: usize,
    pub t2: usize,
    pub grid_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub reps: usize,
    pub seed: u64,
    pub normalized: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<Method>,
}

/// One evaluation step of one method. `lambda` is the penalty in force
/// when the forecast was made — recorded before any rule update, so the
/// trajectory doubles as an audit of the no-leakage ordering. Methods
/// without a penalty leave it unset.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryPoint {
    pub t: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub forecast: f64,
    pub actual: f64,
    pub squared_error: f64,
    pub fallback: bool,
    pub rule_skipped: bool,
}

/// One method's outcome on one replication.
#[derive(Debug, Clone, Serialize)]
pub struct MethodResult {
    pub method: Method,
    pub msfe: f64,
    /// MSFE divided by the static lasso's MSFE on the same data; exactly
    /// 1 for the static method itself.
    pub relative_msfe: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_s: Option<usize>,
    pub fallback_steps: usize,
    pub trajectory: Vec<TrajectoryPoint>,
}

/// One replication: the data draw, its validated penalty, and every
/// method's result on it.
#[derive(Debug, Clone, Serialize)]
pub struct RepReport {
    pub rep: usize,
    pub seed: u64,
    pub lambda_selected: f64,
    pub results: Vec<MethodResult>,
}

/// The full output of `evaluate`: per-method aggregates over replications
/// plus the complete per-replication detail. Timing is only present when
/// produced by `bench`, so `evaluate` reports are bitwise reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub config: RunConfig,
    pub methods: Vec<MethodSummary>,
    pub reps: Vec<RepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingTable>,
}

/// Per-method aggregate over replications.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_msfe: f64,
    /// Mean over replications of the per-replication relative MSFE;
    /// exactly 1 for the static lasso.
    pub relative_msfe: f64,
}

fn mean_f(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Derives the initialization/training split. Without `--train-frac` the
/// series is cut into thirds; with it, training ends at `⌊frac·T⌋` and
/// initialization takes the first half of that.
pub fn split_for(t_len: usize, train_frac: Option<f64>) -> Result<SplitConfig, CliError> {
    match train_frac {
        None => Ok(SplitConfig::thirds(t_len)),
        Some(frac) => {
            if !(frac > 0.0 && frac < 1.0) {
                return Err(CliError::Usage(format!(
                    "--train-frac must lie strictly inside (0, 1), got {frac}"
                )));
            }
            let t2 = (frac * t_len as f64).floor() as usize;
            let t1 = t2 / 2;
            SplitConfig::new(t1, t2).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Log-spaced penalty grid anchored at the maximum absolute correlation
/// over the initialization rows only (targets before `t1`), so the grid
/// never depends on data the validation and evaluation periods will score.
pub fn anchored_grid(
    series: &SeriesSet<f64>,
    p: usize,
    s_lags: usize,
    t1: usize,
    n: usize,
) -> Result<PenaltyGrid<f64>, CliError> {
    let design = build_lag_design(series, p, s_lags)?;
    if t1 <= design.first_index() + 1 {
        return Err(CliError::Data(format!(
            "initialization period ending at {t1} holds no design rows (first usable target is {})",
            design.first_index() + 1
        )));
    }
    let (z, y) = design.rows_before_time(t1);
    let lm = lambda_max(&z, &y);
    Ok(PenaltyGrid::log_spaced(lm, n)?)
}

/// Re-standardizes every series using statistics from its first
/// `stat_len` observations (the initialization+training period), so the
/// evaluation period never leaks into the scaling.
pub fn normalize_series(
    series: &SeriesSet<f64>,
    stat_len: usize,
) -> Result<SeriesSet<f64>, CliError> {
    let (y, _, _) = ingest::normalize(series.y(), stat_len)?;
    let mut xs = Vec::with_capacity(series.k());
    for x in series.x() {
        xs.push(ingest::normalize(x, stat_len)?.0);
    }
    Ok(SeriesSet::new(y, xs)?)
}

/// Materializes the data source: the series plus a human-readable label
/// and the exogenous count. Simulated sources draw with `seed`.
pub fn build_source_series(
    source: &DataSource,
    seed: u64,
) -> Result<(SeriesSet<f64>, String, usize), CliError> {
    match source {
        DataSource::Simulate(sim) => {
            let mut sim = *sim;
            sim.seed = seed;
            let (series, _) = simulate_arx(&sim)?;
            Ok((series, "simulated".to_owned(), sim.k))
        }
        DataSource::Loaded { series, label } => {
            Ok((series.clone(), label.clone(), series.k()))
        }
    }
}

fn points_from(traj: &PenaltyTrajectory<f64>) -> Vec<TrajectoryPoint> {
    traj.entries()
        .iter()
        .map(|e| TrajectoryPoint {
            t: e.t,
            lambda: Some(e.lambda),
            forecast: e.forecast,
            actual: e.actual,
            squared_error: e.squared_error,
            fallback: e.fallback,
            rule_skipped: e.rule_skipped,
        })
        .collect()
}

fn baseline_point(t: usize, forecast: f64, actual: f64) -> TrajectoryPoint {
    let resid = actual - forecast;
    TrajectoryPoint {
        t,
        lambda: None,
        forecast,
        actual,
        squared_error: resid * resid,
        fallback: false,
        rule_skipped: false,
    }
}

fn mean_points(
    series: &SeriesSet<f64>,
    split: &SplitConfig,
) -> Result<Vec<TrajectoryPoint>, CliError> {
    let y = series.y();
    (split.t2()..y.len())
        .map(|t| {
            let forecast = sample_mean_forecast(&y[..t])?;
            Ok(baseline_point(t, forecast, y[t]))
        })
        .collect()
}

fn walk_points(
    series: &SeriesSet<f64>,
    split: &SplitConfig,
) -> Result<Vec<TrajectoryPoint>, CliError> {
    let y = series.y();
    (split.t2()..y.len())
        .map(|t| {
            let forecast = random_walk_forecast(&y[..t])?;
            Ok(baseline_point(t, forecast, y[t]))
        })
        .collect()
}

/// Information-criterion baseline: pick lag orders once on the data before
/// the evaluation period, then re-fit OLS from scratch for every forecast.
fn ic_points(
    series: &SeriesSet<f64>,
    p_max: usize,
    s_max: usize,
    crit: InfoCriterion,
    split: &SplitConfig,
) -> Result<(Vec<TrajectoryPoint>, usize, usize), CliError> {
    let head = series.prefix(split.t2());
    let (p_hat, s_hat) = ic_lag_select(&head, p_max, s_max, crit)?;
    let design = build_lag_design(series, p_hat, s_hat)?;
    let mut points = Vec::with_capacity(design.series_len() - split.t2());
    for t in split.t2()..design.series_len() {
        let (z, y) = design.rows_before_time(t);
        let phi = fit_ols(&z, &y)?;
        let forecast = design.row_for_time(t).dot(&phi);
        points.push(baseline_point(t, forecast, design.response_at_time(t)));
    }
    Ok((points, p_hat, s_hat))
}

fn method_result(method: Method, trajectory: Vec<TrajectoryPoint>) -> MethodResult {
    let errors: Vec<f64> = trajectory.iter().map(|p| p.squared_error).collect();
    let final_lambda = trajectory.last().and_then(|p| p.lambda);
    let fallback_steps = trajectory.iter().filter(|p| p.fallback).count();
    MethodResult {
        method,
        msfe: mean_f(&errors),
        relative_msfe: f64::NAN,
        final_lambda,
        selected_p: None,
        selected_s: None,
        fallback_steps,
        trajectory,
    }
}

fn run_rep(
    series: &SeriesSet<f64>,
    cfg: &ExperimentConfig,
    methods: &[Method],
    split: &SplitConfig,
    rep: usize,
    seed: u64,
) -> Result<RepReport, CliError> {
    let grid = anchored_grid(series, cfg.p, cfg.s, split.t1(), cfg.grid_size)?;
    let validation = rolling_validate(series, cfg.p, cfg.s, &grid, split)?;
    let lambda0 = validation.selected;

    let mut results: Vec<MethodResult> = Vec::with_capacity(methods.len());
    let mut static_msfe = f64::NAN;
    for &method in methods {
        let mut result = (|| -> Result<MethodResult, CliError> {
            Ok(match method {
                Method::Static | Method::Gradient | Method::Newton => {
                    let rule = match method {
                        Method::Static => UpdateRule::Static,
                        Method::Gradient => UpdateRule::Gradient { eta: cfg.eta },
                        _ => UpdateRule::Newton,
                    };
                    let traj = online_evaluate(series, cfg.p, cfg.s, rule, lambda0, split)?;
                    method_result(method, points_from(&traj))
                }
                Method::RollingWindow => {
                    let traj = rolling_window_evaluate(series, cfg.p, cfg.s, &grid, split)?;
                    method_result(method, points_from(&traj))
                }
                Method::Mean => method_result(method, mean_points(series, split)?),
                Method::RandomWalk => method_result(method, walk_points(series, split)?),
                Method::Aic | Method::Bic => {
                    let crit = if method == Method::Aic {
                        InfoCriterion::Aic
                    } else {
                        InfoCriterion::Bic
                    };
                    let (points, p_hat, s_hat) = ic_points(series, cfg.p, cfg.s, crit, split)?;
                    let mut r = method_result(method, points);
                    r.selected_p = Some(p_hat);
                    r.selected_s = Some(s_hat);
                    r
                }
            })
        })()
        .map_err(|e| e.with_context(method.label()))?;

        if method == Method::Static {
            static_msfe = result.msfe;
            result.relative_msfe = 1.0;
        } else {
            result.relative_msfe = result.msfe / static_msfe;
        }
        results.push(result);
    }

    Ok(RepReport {
        rep,
        seed,
        lambda_selected: lambda0,
        results,
    })
}

/// Runs the full protocol: per replication, draw or reuse the data, select
/// the penalty by rolling validation over the training period, evaluate
/// every method over the evaluation period, then aggregate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EvaluationReport, CliError> {
    if cfg.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".to_owned()));
    }
    if cfg.reps > 1 && matches!(cfg.source, DataSource::Loaded { .. }) {
        return Err(CliError::Usage(
            "replications need a simulated source; use --reps 1 with --data".to_owned(),
        ));
    }
    let methods = canonical_methods(&cfg.methods);

    let mut reps = Vec::with_capacity(cfg.reps);
    let mut run_cfg: Option<RunConfig> = None;
    for rep in 0..cfg.reps {
        let rep_seed = cfg.seed.wrapping_add(rep as u64);
        let (series, label, k) = build_source_series(&cfg.source, rep_seed)
            .map_err(|e| e.with_context(&format!("replication {rep}")))?;
        let split = split_for(series.len(), cfg.train_frac)?;
        let series = if cfg.normalize {
            normalize_series(&series, split.t2())?
        } else {
            series
        };
        if run_cfg.is_none() {
            run_cfg = Some(RunConfig {
                source: label,
                k,
                t_len: series.len(),
                p: cfg.p,
                s: cfg.s,
                t1: split.t1(),
                t2: split.t2(),
                grid_size: cfg.grid_size,
                eta: Some(cfg.eta),
                reps: cfg.reps,
                seed: cfg.seed,
                normalized: cfg.normalize,
                methods: methods.clone(),
            });
        }
        let rep_report = run_rep(&series, cfg, &methods, &split, rep, rep_seed)
            .map_err(|e| e.with_context(&format!("replication {rep}")))?;
        reps.push(rep_report);
    }

    let summaries = methods
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            debug_assert!(reps.iter().all(|r| r.results[i].method == method));
            let msfes: Vec<f64> = reps.iter().map(|r| r.results[i].msfe).collect();
            let relative_msfe = if method == Method::Static {
                1.0
            } else {
                let ratios: Vec<f64> =
                    reps.iter().map(|r| r.results[i].relative_msfe).collect();
                mean_f(&ratios)
            };
            MethodSummary {
                method,
                mean_msfe: mean_f(&msfes),
                relative_msfe,
            }
        })
        .collect();

    Ok(EvaluationReport {
        config: run_cfg.expect("at least one replication"),
        methods: summaries,
        reps,
        timing: None,
    })
}

/// Configuration of a `tune` run: one penalty selection, no evaluation.
#[derive(Debug, Clone)]
pub struct TuneConfig {
    pub source: DataSource,
    pub p: usize,
    pub s: usize,
    pub grid_size: usize,
    pub seed: u64,
    pub train_frac: Option<f64>,
    pub normalize: bool,
}

/// The output of `tune`: the grid, its MSFE curve over the training
/// period, and the selected penalty.
#[derive(Debug, Clone, Serialize)]
pub struct TuneReport {
    pub config: RunConfig,
    pub grid: Vec<f64>,
    pub msfe: Vec<f64>,
    pub selected_lambda: f64,
    pub selected_index: usize,
}

/// Runs rolling validation once and reports the MSFE(λ) curve.
pub fn run_tune(cfg: &TuneConfig) -> Result<TuneReport, CliError> {
    let (series, label, k) = build_source_series(&cfg.source, cfg.seed)?;
    let split = split_for(series.len(), cfg.train_frac)?;
    let series = if cfg.normalize {
        normalize_series(&series, split.t2())?
    } else {
        series
    };
    let grid = anchored_grid(&series, cfg.p, cfg.s, split.t1(), cfg.grid_size)?;
    let validation = rolling_validate(&series, cfg.p, cfg.s, &grid, &split)?;
    Ok(TuneReport {
        config: RunConfig {
            source: label,
            k,
            t_len: series.len(),
            p: cfg.p,
            s: cfg.s,
            t1: split.t1(),
            t2: split.t2(),
            grid_size: cfg.grid_size,
            eta: None,
            reps: 1,
            seed: cfg.seed,
            normalized: cfg.normalize,
            methods: Vec::new(),
        },
        grid: validation.grid,
        msfe: validation.msfe,
        selected_lambda: validation.selected,
        selected_index: validation.selected_index,
    })
}
