//! Autoregressive designs with exogenous inputs, and the classical
//! benchmarks fit on them (least squares, AIC/BIC lag selection, sample
//! mean, random walk).
//!
//! Time is 0-based throughout: the row predicting `y[t]` holds
//! `[y[t-1] .. y[t-p], x_1[t-1] .. x_1[t-s], .., x_k[t-1] .. x_k[t-s]]`,
//! so the first usable target index is `max(p, s)`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scalar::{to_f64, Scalar};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ArxError {
    #[error("series too short: need length > {needed}, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("series length mismatch: target has {target}, exogenous series {index} has {got}")]
    LengthMismatch { target: usize, index: usize, got: usize },
    #[error("non-finite value in input series")]
    NonFinite,
    #[error("lag orders produce an empty design (p + k*s = 0)")]
    InvalidLags,
    #[error("design needs at least as many rows as columns ({rows} rows, {cols} columns)")]
    NotEnoughRows { rows: usize, cols: usize },
    #[error("gram matrix is rank deficient (relative pivot {pivot:.3e})")]
    RankDeficient { pivot: f64 },
    #[error("no admissible lag-order candidate in the grid")]
    NoCandidate,
    #[error("empty input slice")]
    EmptySlice,
}

/// A target series and `k` exogenous series of equal length.
#[derive(Debug, Clone)]
pub struct SeriesSet<T: Scalar> {
    y: Vec<T>,
    x: Vec<Vec<T>>,
}

impl<T: Scalar> SeriesSet<T> {
    pub fn new(y: Vec<T>, x: Vec<Vec<T>>) -> Result<Self, ArxError> {
        if y.is_empty() {
            return Err(ArxError::EmptySlice);
        }
        for (i, xi) in x.iter().enumerate() {
            if xi.len() != y.len() {
                return Err(ArxError::LengthMismatch { target: y.len(), index: i, got: xi.len() });
            }
        }
        if y.iter().any(|v| !v.is_finite()) || x.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ArxError::NonFinite);
        }
        Ok(Self { y, x })
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn x(&self) -> &[Vec<T>] {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// The first `n` observations of every series.
    pub fn prefix(&self, n: usize) -> Self {
        assert!(n <= self.len());
        Self {
            y: self.y[..n].to_vec(),
            x: self.x.iter().map(|xi| xi[..n].to_vec()).collect(),
        }
    }
}

/// Lagged regression layout built from a [`SeriesSet`]: one row per target
/// time, `p + k*s` columns (target lags first, then each exogenous series'
/// lags in order).
#[derive(Debug, Clone)]
pub struct LaggedDesign<T: Scalar> {
    z: DMatrix<T>,
    responses: DVector<T>,
    p: usize,
    s: usize,
    k: usize,
    first_index: usize,
    series_len: usize,
}

impl<T: Scalar> LaggedDesign<T> {
    pub fn z(&self) -> &DMatrix<T> {
        &self.z
    }

    pub fn responses(&self) -> &DVector<T> {
        &self.responses
    }

    pub fn n_rows(&self) -> usize {
        self.z.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.z.ncols()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// 0-based time index of the first response row, `max(p, s)`.
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    /// Length of the series the design was built from.
    pub fn series_len(&self) -> usize {
        self.series_len
    }

    /// Row predicting `y[t]`.
    pub fn row_for_time(&self, t: usize) -> DVector<T> {
        let r = t - self.first_index;
        self.z.row(r).transpose()
    }

    pub fn response_at_time(&self, t: usize) -> T {
        self.responses[t - self.first_index]
    }

    /// Design restricted to rows with target time `< t` (i.e. everything a
    /// model fit "through time t-1" may see).
    pub fn rows_before_time(&self, t: usize) -> (DMatrix<T>, DVector<T>) {
        let r = t.saturating_sub(self.first_index).min(self.n_rows());
        (self.z.rows(0, r).into_owned(), DVector::from(self.responses.rows(0, r).into_owned()))
    }
}

/// Build the lagged design for lag orders `p` (target) and `s` (each
/// exogenous series). Requires at least two usable rows.
pub fn build_lag_design<T: Scalar>(
    series: &SeriesSet<T>,
    p: usize,
    s: usize,
) -> Result<LaggedDesign<T>, ArxError> {
    let k = series.k();
    let cols = p + k * s;
    if cols == 0 {
        return Err(ArxError::InvalidLags);
    }
    let t_len = series.len();
    let first = p.max(s);
    if t_len <= first + 1 {
        return Err(ArxError::SeriesTooShort { needed: first + 1, got: t_len });
    }
    let rows = t_len - first;
    let mut z = DMatrix::zeros(rows, cols);
    let mut responses = DVector::zeros(rows);
    for r in 0..rows {
        let t = first + r;
        let mut c = 0;
        for lag in 1..=p {
            z[(r, c)] = series.y[t - lag];
            c += 1;
        }
        for xi in &series.x {
            for lag in 1..=s {
                z[(r, c)] = xi[t - lag];
                c += 1;
            }
        }
        responses[r] = series.y[t];
    }
    Ok(LaggedDesign { z, responses, p, s, k, first_index: first, series_len: t_len })
}

/// Least squares via the normal equations, with a relative pivot guard on
/// the Cholesky factor.
pub fn fit_ols<T: Scalar>(z: &DMatrix<T>, y: &DVector<T>) -> Result<DVector<T>, ArxError> {
    let (rows, cols) = (z.nrows(), z.ncols());
    if rows < cols {
        return Err(ArxError::NotEnoughRows { rows, cols });
    }
    let gram = z.transpose() * z;
    let rhs = z.transpose() * y;
    let chol = nalgebra::Cholesky::new(gram).ok_or(ArxError::RankDeficient { pivot: 0.0 })?;
    let diag = chol.l_dirty().diagonal();
    let mut min_piv = f64::INFINITY;
    let mut max_piv = 0.0f64;
    for d in diag.iter() {
        let piv = to_f64(*d) * to_f64(*d);
        min_piv = min_piv.min(piv);
        max_piv = max_piv.max(piv);
    }
    if max_piv <= 0.0 || min_piv / max_piv <= 1e-10 {
        return Err(ArxError::RankDeficient { pivot: min_piv / max_piv.max(f64::MIN_POSITIVE) });
    }
    Ok(chol.solve(&rhs))
}

/// Convenience wrapper fitting the whole design.
pub fn fit_ols_design<T: Scalar>(d: &LaggedDesign<T>) -> Result<DVector<T>, ArxError> {
    fit_ols(d.z(), d.responses())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoCriterion {
    Aic,
    Bic,
}

/// `log(sigma_hat) + penalty * n_params / t_len` with penalty 2 (AIC) or
/// `log(t_len)` (BIC); `sigma_hat` is the mean squared OLS residual and
/// `t_len` the full series length behind the design.
pub(crate) fn ic_value(sigma_hat: f64, n_params: usize, t_len: usize, crit: InfoCriterion) -> f64 {
    let penalty = match crit {
        InfoCriterion::Aic => 2.0,
        InfoCriterion::Bic => (t_len as f64).ln(),
    };
    sigma_hat.ln() + penalty * n_params as f64 / t_len as f64
}

/// Information-criterion score of the OLS fit on the full design.
pub fn ic_score<T: Scalar>(d: &LaggedDesign<T>, crit: InfoCriterion) -> Result<f64, ArxError> {
    let phi = fit_ols_design(d)?;
    let resid = d.responses() - d.z() * &phi;
    let sigma_hat = to_f64(resid.dot(&resid)) / d.n_rows() as f64;
    Ok(ic_value(sigma_hat, d.n_cols(), d.series_len(), crit))
}

/// Exhaustive lag-order selection over `p_grid x s_grid`, excluding (0, 0)
/// and any combination without enough rows. Ties prefer fewer parameters,
/// then a smaller exogenous order.
pub fn ic_lag_select_over<T: Scalar>(
    series: &SeriesSet<T>,
    p_grid: impl IntoIterator<Item = usize>,
    s_grid: impl IntoIterator<Item = usize> + Clone,
    crit: InfoCriterion,
) -> Result<(usize, usize), ArxError> {
    let k = series.k();
    let mut best: Option<(f64, usize, usize, usize)> = None; // (score, params, s, p)
    for p in p_grid {
        for s in s_grid.clone() {
            if p == 0 && s == 0 {
                continue;
            }
            let cols = p + k * s;
            if cols == 0 {
                continue;
            }
            let d = match build_lag_design(series, p, s) {
                Ok(d) => d,
                Err(ArxError::SeriesTooShort { .. }) => continue,
                Err(e) => return Err(e),
            };
            if d.n_rows() < d.n_cols() {
                continue;
            }
            let score = match ic_score(&d, crit) {
                Ok(v) => v,
                Err(ArxError::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            };
            let key = (score, cols, s, p);
            let better = match &best {
                None => true,
                Some(cur) => {
                    key.0 < cur.0
                        || (key.0 == cur.0
                            && (key.1, key.2, key.3) < (cur.1, cur.2, cur.3))
                }
            };
            if better {
                best = Some(key);
            }
        }
    }
    best.map(|(_, _, s, p)| (p, s)).ok_or(ArxError::NoCandidate)
}

/// Grid selection over `0..=p_max` and `0..=s_max` (the exogenous order is
/// pinned to 0 when there are no exogenous series).
pub fn ic_lag_select<T: Scalar>(
    series: &SeriesSet<T>,
    p_max: usize,
    s_max: usize,
    crit: InfoCriterion,
) -> Result<(usize, usize), ArxError> {
    let s_grid: Vec<usize> = if series.k() == 0 { vec![0] } else { (0..=s_max).collect() };
    ic_lag_select_over(series, 0..=p_max, s_grid, crit)
}

/// Forecast by the mean of everything seen so far.
pub fn sample_mean_forecast<T: Scalar>(y: &[T]) -> Result<T, ArxError> {
    if y.is_empty() {
        return Err(ArxError::EmptySlice);
    }
    Ok(crate::scalar::mean(y))
}

/// Forecast by the last observed value.
pub fn random_walk_forecast<T: Scalar>(y: &[T]) -> Result<T, ArxError> {
    y.last().copied().ok_or(ArxError::EmptySlice)
}
