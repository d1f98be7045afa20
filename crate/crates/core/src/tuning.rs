//! Penalty selection: rolling validation over a grid, a rolling-window
//! re-selection variant, and two online adaptation rules (gradient and
//! Newton steps on the one-step prediction error, taken in the log-penalty
//! domain so the penalty stays positive).
//!
//! All evaluation loops share one normative ordering per step `t`:
//! the forecast error for observation `t+1` is recorded with the current
//! penalty first; only then is the penalty updated and the observation
//! folded into the model. The recorded error therefore never sees the
//! penalty chosen in reaction to it.

use nalgebra::DVector;
use thiserror::Error;

use crate::arx::{build_lag_design, ArxError, LaggedDesign, SeriesSet};
use crate::homotopy::{ActiveModel, HomotopyError};
use crate::lasso::lambda_max;
use crate::scalar::{cast, to_f64, Scalar};

/// Hessian-degeneracy guard for the Newton rule: updates are skipped when
/// the curvature factor is this small in magnitude (or negative).
pub const NEWTON_GUARD: f64 = 1e-10;

/// Both rules cap the log-domain step at this magnitude (a factor of `e`
/// per observation), keeping one bad step from blowing up the penalty.
pub const MAX_LOG_STEP: f64 = 1.0;

#[derive(Debug, Error)]
pub enum TuningError {
    #[error("invalid split: {reason}")]
    InvalidSplit { reason: String },
    #[error("invalid penalty grid: {reason}")]
    InvalidGrid { reason: String },
    #[error("the design is degenerate: all features are uncorrelated with the response")]
    DegenerateDesign,
    #[error("every penalty thread failed to evaluate")]
    NoViableThread,
    #[error(transparent)]
    Design(#[from] ArxError),
    #[error(transparent)]
    Model(#[from] HomotopyError),
}

/// Time indices splitting a series into initialization `[0, T1)`,
/// training `[T1, T2)`, and evaluation `[T2, T)` segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitConfig {
    t1: usize,
    t2: usize,
}

impl SplitConfig {
    /// An explicit split. `t1 < t2` is required here; compatibility with
    /// a concrete design (lag depth, series length) is checked when the
    /// split is used.
    pub fn new(t1: usize, t2: usize) -> Result<Self, TuningError> {
        if t1 >= t2 {
            return Err(TuningError::InvalidSplit {
                reason: format!("need t1 < t2, got t1 = {t1}, t2 = {t2}"),
            });
        }
        Ok(SplitConfig { t1, t2 })
    }

    /// The default split at one third and two thirds of the series.
    pub fn thirds(t_len: usize) -> Self {
        SplitConfig {
            t1: t_len / 3,
            t2: 2 * t_len / 3,
        }
    }

    pub fn t1(&self) -> usize {
        self.t1
    }

    pub fn t2(&self) -> usize {
        self.t2
    }

    /// Width of the training window, which the rolling-window evaluator
    /// keeps fixed as it advances.
    pub fn window_width(&self) -> usize {
        self.t2 - self.t1
    }

    fn check_against<T: Scalar>(&self, design: &LaggedDesign<T>) -> Result<(), TuningError> {
        if self.t1 <= design.first_index() {
            return Err(TuningError::InvalidSplit {
                reason: format!(
                    "t1 = {} leaves no initialization rows (first usable target is {})",
                    self.t1,
                    design.first_index()
                ),
            });
        }
        if self.t2 > design.series_len() {
            return Err(TuningError::InvalidSplit {
                reason: format!(
                    "t2 = {} exceeds the series length {}",
                    self.t2,
                    design.series_len()
                ),
            });
        }
        Ok(())
    }
}

/// A strictly decreasing, strictly positive list of candidate penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyGrid<T> {
    values: Vec<T>,
}

impl<T: Scalar> PenaltyGrid<T> {
    /// Wraps an explicit list of candidates, validating positivity and
    /// strict decrease.
    pub fn new(values: Vec<T>) -> Result<Self, TuningError> {
        if values.is_empty() {
            return Err(TuningError::InvalidGrid {
                reason: "empty grid".into(),
            });
        }
        for v in &values {
            if !v.is_finite() || *v <= T::zero() {
                return Err(TuningError::InvalidGrid {
                    reason: format!("non-positive or non-finite value {}", to_f64(*v)),
                });
            }
        }
        for pair in values.windows(2) {
            if pair[1] >= pair[0] {
                return Err(TuningError::InvalidGrid {
                    reason: "values must be strictly decreasing".into(),
                });
            }
        }
        Ok(PenaltyGrid { values })
    }

    /// `n` log-spaced points from `lambda_max` down to `1e-3·lambda_max`.
    pub fn log_spaced(lambda_max: T, n: usize) -> Result<Self, TuningError> {
        if n < 2 {
            return Err(TuningError::InvalidGrid {
                reason: format!("need at least 2 grid points, got {n}"),
            });
        }
        if !lambda_max.is_finite() || lambda_max <= T::zero() {
            return Err(TuningError::DegenerateDesign);
        }
        let values = (0..n)
            .map(|i| {
                let expo = -3.0 * i as f64 / (n - 1) as f64;
                lambda_max * cast::<T>(10f64.powf(expo))
            })
            .collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The default candidate grid for a lag design: 50 (or `n`) log-spaced
/// points anchored at the smallest penalty whose optimum is all-zero.
pub fn default_grid<T: Scalar>(
    design: &LaggedDesign<T>,
    n: usize,
) -> Result<PenaltyGrid<T>, TuningError> {
    let lmax = lambda_max(design.z(), design.responses());
    PenaltyGrid::log_spaced(lmax, n)
}

/// How a trajectory's penalties were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryMethod {
    Static,
    RollingWindow,
    OnlineGradient,
    OnlineNewton,
}

/// One evaluation step: the forecast of `y[t]` made from data through
/// `t - 1` with penalty `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryEntry<T> {
    /// Time index of the forecast target.
    pub t: usize,
    /// Penalty in force when the forecast was made.
    pub lambda: T,
    pub forecast: T,
    pub actual: T,
    pub squared_error: T,
    /// True when folding this step's observation in required abandoning
    /// the homotopy route for a direct refit.
    pub fallback: bool,
    /// True when the online rule's guards held the penalty fixed this
    /// step (Newton rule only).
    pub rule_skipped: bool,
}

/// The record of one evaluation run: per-step forecasts, errors, and the
/// penalty path taken.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyTrajectory<T> {
    method: TrajectoryMethod,
    entries: Vec<TrajectoryEntry<T>>,
}

impl<T: Scalar> PenaltyTrajectory<T> {
    pub fn method(&self) -> TrajectoryMethod {
        self.method
    }

    pub fn entries(&self) -> &[TrajectoryEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Mean squared forecast error over the trajectory.
    pub fn msfe(&self) -> T {
        if self.entries.is_empty() {
            return T::zero();
        }
        let total: T = self.entries.iter().map(|e| e.squared_error).sum();
        total / cast::<T>(self.entries.len() as f64)
    }

    /// Final penalty after the last update, or the last step's penalty
    /// when no entry recorded a later one.
    pub fn final_lambda(&self) -> Option<T> {
        self.entries.last().map(|e| e.lambda)
    }
}

/// Squared one-step prediction error of the model on a test observation.
pub fn prediction_error<T: Scalar>(model: &ActiveModel<T>, z: &DVector<T>, y: T) -> T {
    let resid = y - model.predict(z);
    resid * resid
}

/// Gradient of the squared one-step prediction error with respect to the
/// log-penalty, holding the active set fixed:
/// `-2λ (z_A' K v_A)(z_A' φ_A - y)`. Empty active set ⇒ 0.
pub fn grad_log_lambda<T: Scalar>(model: &ActiveModel<T>, z: &DVector<T>, y: T) -> T {
    if model.active().is_empty() {
        return T::zero();
    }
    let z_a = restrict(z, model.active());
    let sens = model.gram_inverse().bilinear(&z_a, &model.sign_vector());
    let resid = model.predict(z) - y;
    let two = cast::<T>(2.0);
    -two * model.lambda() * sens * resid
}

/// Multiplicative gradient step on the penalty: `λ·exp(-η·grad)` with the
/// log-step clamped to `±1`. `η = 0` leaves the penalty bit-identical.
pub fn gradient_update<T: Scalar>(lambda: T, grad: T, eta: T) -> T {
    lambda * clamp_log_step(-eta * grad).exp()
}

/// Outcome of a Newton penalty step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonStep<T> {
    pub lambda: T,
    /// True when a guard held the penalty fixed.
    pub skipped: bool,
}

/// Newton step on the penalty. The gradient and Hessian of the one-step
/// error share the factor `-2λ (z_A' K v_A)`, so their ratio collapses to
/// `(z_A' φ_A - y) / (z_A' Σ - y)` with `Σ(λ) = K (Z'y|_A - 2λ v_A)`.
/// The step is skipped (penalty unchanged) when the curvature factor
/// `z_A' Σ - y` is smaller than [`NEWTON_GUARD`] in magnitude or has the
/// wrong sign, either of which would make the ratio a step up or a blowup.
pub fn newton_update<T: Scalar>(
    model: &ActiveModel<T>,
    z: &DVector<T>,
    y: T,
    lambda: T,
) -> NewtonStep<T> {
    if model.active().is_empty() {
        return NewtonStep {
            lambda,
            skipped: true,
        };
    }
    let z_a = restrict(z, model.active());
    let two = cast::<T>(2.0);
    let rhs = model.zty_active() - model.sign_vector() * (two * lambda);
    let sigma = model.gram_inverse().mul_vec(&rhs);
    let denom = z_a.dot(&sigma) - y;
    if denom.abs() <= cast::<T>(NEWTON_GUARD) || denom <= T::zero() {
        return NewtonStep {
            lambda,
            skipped: true,
        };
    }
    let ratio = (model.predict(z) - y) / denom;
    NewtonStep {
        lambda: lambda * clamp_log_step(ratio).exp(),
        skipped: false,
    }
}

/// Penalty-update rule for the online evaluation loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateRule<T> {
    /// Keep the penalty fixed.
    Static,
    /// Multiplicative gradient steps with learning rate `eta`.
    Gradient { eta: T },
    /// Newton steps with degeneracy and curvature guards.
    Newton,
}

impl<T> UpdateRule<T> {
    fn method(&self) -> TrajectoryMethod {
        match self {
            UpdateRule::Static => TrajectoryMethod::Static,
            UpdateRule::Gradient { .. } => TrajectoryMethod::OnlineGradient,
            UpdateRule::Newton => TrajectoryMethod::OnlineNewton,
        }
    }
}

/// Runs the online evaluation loop over `[T2, T)`: per step, forecast and
/// record the error at the current penalty, let `rule` adapt the penalty
/// using the new observation, then fold the observation into the model at
/// the adapted penalty.
pub fn online_evaluate<T: Scalar>(
    series: &SeriesSet<T>,
    p: usize,
    s_lags: usize,
    rule: UpdateRule<T>,
    lambda_init: T,
    split: &SplitConfig,
) -> Result<PenaltyTrajectory<T>, TuningError> {
    let design = build_lag_design(series, p, s_lags)?;
    split.check_against(&design)?;
    if split.t2() >= design.series_len() {
        return Err(TuningError::InvalidSplit {
            reason: format!(
                "t2 = {} leaves no evaluation steps in a series of length {}",
                split.t2(),
                design.series_len()
            ),
        });
    }

    let (z0, y0) = design.rows_before_time(split.t2());
    let mut model = ActiveModel::fit(&z0, &y0, lambda_init)?;
    let mut lambda = lambda_init;
    let mut entries = Vec::with_capacity(design.series_len() - split.t2());

    for t in split.t2()..design.series_len() {
        let z = design.row_for_time(t);
        let actual = design.response_at_time(t);
        let forecast = model.predict(&z);
        let squared_error = prediction_error(&model, &z, actual);

        let (next_lambda, rule_skipped) = match rule {
            UpdateRule::Static => (lambda, false),
            UpdateRule::Gradient { eta } => {
                let grad = grad_log_lambda(&model, &z, actual);
                (gradient_update(lambda, grad, eta), false)
            }
            UpdateRule::Newton => {
                let step = newton_update(&model, &z, actual, lambda);
                (step.lambda, step.skipped)
            }
        };

        let fallback = absorb(&mut model, actual, &z, next_lambda)?;
        entries.push(TrajectoryEntry {
            t,
            lambda,
            forecast,
            actual,
            squared_error,
            fallback,
            rule_skipped,
        });
        lambda = next_lambda;
    }

    Ok(PenaltyTrajectory {
        method: rule.method(),
        entries,
    })
}

/// Evaluation loop with the penalty held fixed; the model is still
/// updated online with each observation.
pub fn static_evaluate<T: Scalar>(
    series: &SeriesSet<T>,
    p: usize,
    s_lags: usize,
    lambda: T,
    split: &SplitConfig,
) -> Result<PenaltyTrajectory<T>, TuningError> {
    online_evaluate(series, p, s_lags, UpdateRule::Static, lambda, split)
}

/// Per-grid-point mean squared forecast errors over the training window,
/// and the winning penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOutcome<T> {
    /// Grid values, in the grid's (decreasing) order.
    pub grid: Vec<T>,
    /// Mean squared forecast error per grid value; infinite for threads
    /// that failed.
    pub msfe: Vec<T>,
    /// Selected penalty: the argmin, ties resolved toward the larger
    /// penalty.
    pub selected: T,
    pub selected_index: usize,
}

/// Scores every grid penalty by one-step forecasting over `[T1, T2)`,
/// each on its own online-updated model, and picks the argmin.
pub fn rolling_validate<T: Scalar>(
    series: &SeriesSet<T>,
    p: usize,
    s_lags: usize,
    grid: &PenaltyGrid<T>,
    split: &SplitConfig,
) -> Result<ValidationOutcome<T>, TuningError> {
    let design = build_lag_design(series, p, s_lags)?;
    split.check_against(&design)?;

    let mut msfe = Vec::with_capacity(grid.len());
    for &lambda in grid.values() {
        let trace = run_thread(&design, lambda, split.t1(), split.t2());
        msfe.push(match trace {
            Ok(trace) => mean(&trace.errors),
            Err(_) => cast::<T>(f64::INFINITY),
        });
    }
    let (selected_index, selected) = select_min(grid.values(), &msfe)?;
    Ok(ValidationOutcome {
        grid: grid.values().to_vec(),
        msfe,
        selected,
        selected_index,
    })
}

/// Rolling-window evaluation: every step re-selects the penalty from the
/// original grid by mean squared error over the trailing window of
/// `T2 - T1` forecasts, then forecasts with the winner's model.
///
/// Each grid penalty keeps one online-updated model for the whole run
/// (selection depends only on each thread's own forecasts, so threads can
/// be rolled forward once and shared across steps).
pub fn rolling_window_evaluate<T: Scalar>(
    series: &SeriesSet<T>,
    p: usize,
    s_lags: usize,
    grid: &PenaltyGrid<T>,
    split: &SplitConfig,
) -> Result<PenaltyTrajectory<T>, TuningError> {
    let design = build_lag_design(series, p, s_lags)?;
    split.check_against(&design)?;
    let t_len = design.series_len();
    if split.t2() >= t_len {
        return Err(TuningError::InvalidSplit {
            reason: format!(
                "t2 = {} leaves no evaluation steps in a series of length {}",
                split.t2(),
                t_len
            ),
        });
    }
    let width = split.window_width();

    // Roll every penalty thread across both the training and evaluation
    // ranges, caching per-target forecasts and errors.
    let traces: Vec<Option<ThreadTrace<T>>> = grid
        .values()
        .iter()
        .map(|&lambda| run_thread(&design, lambda, split.t1(), t_len).ok())
        .collect();
    if traces.iter().all(|t| t.is_none()) {
        return Err(TuningError::NoViableThread);
    }

    // Prefix sums over each thread's squared errors make any window mean
    // O(1): errors for targets [a, b) sum to prefix[b] - prefix[a].
    let prefixes: Vec<Option<Vec<T>>> = traces
        .iter()
        .map(|trace| {
            trace.as_ref().map(|tr| {
                let mut acc = T::zero();
                let mut prefix = Vec::with_capacity(tr.errors.len() + 1);
                prefix.push(T::zero());
                for &e in &tr.errors {
                    acc += e;
                    prefix.push(acc);
                }
                prefix
            })
        })
        .collect();

    let mut entries = Vec::with_capacity(t_len - split.t2());
    for t in split.t2()..t_len {
        // Window of forecast targets [t - width, t), as offsets from T1.
        let lo = t - width - split.t1();
        let hi = t - split.t1();
        let mut scores = Vec::with_capacity(grid.len());
        for prefix in &prefixes {
            scores.push(match prefix {
                Some(prefix) => (prefix[hi] - prefix[lo]) / cast::<T>(width as f64),
                None => cast::<T>(f64::INFINITY),
            });
        }
        let (idx, lambda) = select_min(grid.values(), &scores)?;
        let trace = traces[idx].as_ref().expect("selected thread exists");
        let offset = t - split.t1();
        entries.push(TrajectoryEntry {
            t,
            lambda,
            forecast: trace.forecasts[offset],
            actual: design.response_at_time(t),
            squared_error: trace.errors[offset],
            fallback: trace.fallbacks[offset],
            rule_skipped: false,
        });
    }

    Ok(PenaltyTrajectory {
        method: TrajectoryMethod::RollingWindow,
        entries,
    })
}

/// Forecast record of one fixed-penalty thread over targets
/// `[from, to)`, indexed by `target - from`.
struct ThreadTrace<T> {
    forecasts: Vec<T>,
    errors: Vec<T>,
    fallbacks: Vec<bool>,
}

/// Fits on data before `from`, then rolls forward one observation at a
/// time at a fixed penalty, recording each one-step forecast.
fn run_thread<T: Scalar>(
    design: &LaggedDesign<T>,
    lambda: T,
    from: usize,
    to: usize,
) -> Result<ThreadTrace<T>, TuningError> {
    let (z0, y0) = design.rows_before_time(from);
    let mut model = ActiveModel::fit(&z0, &y0, lambda)?;
    let mut trace = ThreadTrace {
        forecasts: Vec::with_capacity(to - from),
        errors: Vec::with_capacity(to - from),
        fallbacks: Vec::with_capacity(to - from),
    };
    for t in from..to {
        let z = design.row_for_time(t);
        let actual = design.response_at_time(t);
        trace.forecasts.push(model.predict(&z));
        trace.errors.push(prediction_error(&model, &z, actual));
        trace.fallbacks.push(absorb(&mut model, actual, &z, lambda)?);
    }
    Ok(trace)
}

/// Folds an observation into the model at `lambda`, falling back to a
/// direct refit when the homotopy path stalls. Returns whether the
/// fallback was used.
fn absorb<T: Scalar>(
    model: &mut ActiveModel<T>,
    y: T,
    z: &DVector<T>,
    lambda: T,
) -> Result<bool, TuningError> {
    match model.update(y, z, lambda) {
        Ok(outcome) => Ok(outcome.used_fallback),
        Err(HomotopyError::PathStalled { .. }) => {
            model.absorb_and_refit(y, z, lambda)?;
            Ok(true)
        }
        Err(e) => Err(e.into()),
    }
}

/// Argmin over finite scores; ties go to the earlier (larger) penalty.
fn select_min<T: Scalar>(grid: &[T], scores: &[T]) -> Result<(usize, T), TuningError> {
    let mut best: Option<(usize, T)> = None;
    for (i, &score) in scores.iter().enumerate() {
        if !score.is_finite() {
            continue;
        }
        match best {
            Some((_, s)) if score >= s => {}
            _ => best = Some((i, score)),
        }
    }
    match best {
        Some((i, _)) => Ok((i, grid[i])),
        None => Err(TuningError::NoViableThread),
    }
}

fn restrict<T: Scalar>(z: &DVector<T>, active: &[usize]) -> DVector<T> {
    DVector::from_iterator(active.len(), active.iter().map(|&j| z[j]))
}

fn clamp_log_step<T: Scalar>(step: T) -> T {
    step.min(cast::<T>(MAX_LOG_STEP)).max(cast::<T>(-MAX_LOG_STEP))
}

fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let total: T = xs.iter().copied().sum();
    total / cast::<T>(xs.len() as f64)
}
