//! Online lasso model maintained by piecewise-linear homotopy.
//!
//! [`ActiveModel`] keeps a fitted l1-penalized least-squares model in
//! "sufficient statistics" form: the Gram matrix `Z'Z`, the correlation
//! vector `Z'y`, and the inverse of the active-set block of the Gram
//! matrix. Two path routines move the model between optima without
//! refitting from scratch:
//!
//! * [`ActiveModel::lambda_path`] slides the penalty to a new value,
//!   tracking the piecewise-linear coefficient path and updating the
//!   active set at each breakpoint.
//! * [`ActiveModel::insert_observation`] folds one new observation into
//!   the fit by continuously scaling it in (weight `γ²` going 0 → 1),
//!   again handling active-set changes at breakpoints.
//!
//! Combined via [`ActiveModel::update`], these give an online solver whose
//! per-step cost is a handful of rank-one updates instead of a full refit.
//! Every public mutation leaves the model at a KKT point of the lasso
//! problem implied by its summaries; [`ActiveModel::check_consistency`]
//! verifies this and is used heavily in tests.

mod gamma;
mod lambda;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::lasso::{coordinate_descent_cov, CdSettings, LassoError};
use crate::linalg::{GramInverse, LinalgError, GUARD_TOL, REFRESH_INTERVAL};
use crate::scalar::{cast, to_f64, Scalar};

/// Numerical slack used when ordering path breakpoints. After an event is
/// processed the path position is nudged past it by this amount so the same
/// breakpoint is not rediscovered forever.
pub const EVENT_NUDGE: f64 = 1e-12;

/// A path terminates with `PathStalled` once it has processed more than
/// `STALL_FACTOR * n_features` events, which a non-degenerate piecewise
/// path never approaches.
pub const STALL_FACTOR: usize = 10;

/// Suppression window for re-entry of a feature that has just left the
/// active set. At its exit the feature's correlation sits exactly on the
/// penalty boundary, so the entry solve for it divides rounding noise by a
/// segment slope and can place a phantom crossing just past [`EVENT_NUDGE`],
/// silently corrupting the active set. A genuine re-entry requires the
/// correlation to travel back out to the boundary, which happens far
/// outside this window.
pub(crate) const REENTRY_WINDOW: f64 = 1e-9;

/// Relative tolerance for recognizing a boundary-pinned state: an inactive
/// correlation sitting exactly on the penalty boundary, or an active
/// coefficient sitting exactly at zero. Fitting at precisely `lambda_max`
/// produces both (the extreme feature's correlation equals the penalty to
/// the bit), and a new observation can then push the pinned quantity to
/// the infeasible side. The crossing solve places that event at the
/// current path position, which the forward-progress nudge would discard,
/// so pinned states moving infeasibly are resolved by explicit zero-step
/// events instead.
pub(crate) const PIN_TOL: f64 = 1e-10;

/// What happened at a path breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// A feature's correlation reached the penalty boundary and the
    /// feature entered the active set.
    FeatureEnters,
    /// An active coefficient crossed zero and the feature left the
    /// active set.
    FeatureLeaves,
}

/// One active-set change encountered while following a homotopy path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionEvent<T> {
    pub kind: EventKind,
    /// Column index of the feature that entered or left.
    pub feature: usize,
    /// Where along the path the event occurred: the penalty value on a
    /// penalty path, or the scaling factor `γ ∈ [0, 1]` on an
    /// observation-insertion path.
    pub location: T,
}

/// Result of one online update step.
#[derive(Debug, Clone, Default)]
pub struct UpdateOutcome<T> {
    /// Active-set events from the penalty-adjustment stage.
    pub lambda_events: Vec<TransitionEvent<T>>,
    /// Active-set events from the observation-insertion stage.
    pub gamma_events: Vec<TransitionEvent<T>>,
    /// True when a path could not be followed exactly and the model fell
    /// back to a direct coordinate-descent refit. The resulting model is
    /// still a valid optimum; only the incremental route was abandoned.
    pub used_fallback: bool,
}

/// Errors from the homotopy driver.
#[derive(Debug, Error)]
pub enum HomotopyError {
    /// A path processed far more breakpoints than the feature count
    /// justifies; the model is left valid at `position`.
    #[error("path stalled after {events} events at position {position}")]
    PathStalled { events: usize, position: f64 },
    /// A rank-one update failed even after refactorizing from scratch.
    #[error("rank-one update failed: {0}")]
    Linalg(#[from] LinalgError),
    /// The coordinate-descent fallback failed to converge.
    #[error("fallback solve failed: {0}")]
    Solver(String),
    /// An input did not match the model's dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A penalty value was not strictly positive and finite.
    #[error("penalty must be positive and finite, got {0}")]
    InvalidPenalty(f64),
    /// An observation contained NaN or infinity.
    #[error("observation contains a non-finite value")]
    NonFinite,
}

impl<T: Scalar> From<LassoError<T>> for HomotopyError {
    fn from(e: LassoError<T>) -> Self {
        HomotopyError::Solver(e.to_string())
    }
}

/// Online l1-penalized least-squares model over summary statistics.
///
/// The model never stores raw observations: it maintains `Z'Z`, `Z'y`,
/// `y'y` and the current optimum (active set, signs, coefficients, and
/// the inverse of the active Gram block). New data and penalty changes
/// are folded in by homotopy; see the module docs.
#[derive(Debug, Clone)]
pub struct ActiveModel<T: Scalar> {
    /// Full Gram matrix `Z'Z`, all features.
    gram: DMatrix<T>,
    /// Full correlation vector `Z'y`.
    zty: DVector<T>,
    /// Response energy `y'y`, maintained so residual sums of squares can
    /// be produced without raw data.
    yty: T,
    /// Number of observations folded in so far.
    n_rows: usize,
    /// Current penalty.
    lambda: T,
    /// Active feature indices, in the order used by `ginv` and
    /// `phi_active`.
    active: Vec<usize>,
    /// Signs of the active coefficients (`0` for inactive features),
    /// indexed by feature.
    signs: Vec<i8>,
    /// Coefficients of the active features, aligned with `active`.
    phi_active: DVector<T>,
    /// Inverse of the active block of `gram`, updated by rank-one edits.
    ginv: GramInverse<T>,
    /// Cached residual correlations `Z'y - Z'Z φ`, refreshed whenever a
    /// public operation completes.
    corr: DVector<T>,
}

impl<T: Scalar> ActiveModel<T> {
    /// Creates a model over `n_features` features with no data. The
    /// optimum for any positive penalty is the zero vector.
    pub fn new(n_features: usize, lambda: T) -> Result<Self, HomotopyError> {
        check_lambda(lambda)?;
        Ok(ActiveModel {
            gram: DMatrix::zeros(n_features, n_features),
            zty: DVector::zeros(n_features),
            yty: T::zero(),
            n_rows: 0,
            lambda,
            active: Vec::new(),
            signs: vec![0; n_features],
            phi_active: DVector::zeros(0),
            ginv: GramInverse::empty(),
            corr: DVector::zeros(n_features),
        })
    }

    /// Fits a model to a design matrix by running the penalty path down
    /// from the smallest penalty with an all-zero optimum.
    pub fn fit(z: &DMatrix<T>, y: &DVector<T>, lambda: T) -> Result<Self, HomotopyError> {
        if z.nrows() != y.len() {
            return Err(HomotopyError::DimensionMismatch {
                expected: z.nrows(),
                got: y.len(),
            });
        }
        let gram = z.transpose() * z;
        let zty = z.transpose() * y;
        let yty = y.dot(y);
        Self::from_summaries(gram, zty, yty, z.nrows(), lambda)
    }

    /// Fits a model from precomputed summaries `Z'Z`, `Z'y` and `y'y`.
    pub fn from_summaries(
        gram: DMatrix<T>,
        zty: DVector<T>,
        yty: T,
        n_rows: usize,
        lambda: T,
    ) -> Result<Self, HomotopyError> {
        check_lambda(lambda)?;
        let m = gram.nrows();
        if gram.ncols() != m || zty.len() != m {
            return Err(HomotopyError::DimensionMismatch {
                expected: m,
                got: zty.len().max(gram.ncols()),
            });
        }
        if gram.iter().any(|v| !v.is_finite()) || zty.iter().any(|v| !v.is_finite()) {
            return Err(HomotopyError::NonFinite);
        }
        // At any penalty >= max_j |Z'y|_j the optimum is exactly zero, so
        // start above that and slide the penalty down to the requested
        // value. The starting point sits strictly past the largest
        // correlation so the first entry event is not lost inside the
        // breakpoint nudge.
        let lambda_max = zty.iter().fold(T::zero(), |acc: T, v| acc.max(v.abs()));
        let lambda_start = if lambda >= lambda_max {
            lambda
        } else {
            lambda_max + cast::<T>(1e-9) * (lambda_max + T::one())
        };
        let mut model = ActiveModel {
            corr: zty.clone(),
            gram,
            zty,
            yty,
            n_rows,
            lambda: lambda_start,
            active: Vec::new(),
            signs: vec![0; m],
            phi_active: DVector::zeros(0),
            ginv: GramInverse::empty(),
        };
        if lambda < lambda_start {
            match model.lambda_path(lambda) {
                Ok(_) => {}
                Err(HomotopyError::PathStalled { .. }) | Err(HomotopyError::Linalg(_)) => {
                    model.refit_at(lambda)?;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(model)
    }

    /// Number of features (columns) the model is defined over.
    pub fn n_features(&self) -> usize {
        self.gram.nrows()
    }

    /// Number of observations folded in so far.
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Current penalty.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Active feature indices in internal order.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Coefficient signs indexed by feature; `0` means inactive.
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Active coefficients, aligned with [`ActiveModel::active`].
    pub fn phi_active(&self) -> &DVector<T> {
        &self.phi_active
    }

    /// Inverse of the active Gram block.
    pub fn gram_inverse(&self) -> &GramInverse<T> {
        &self.ginv
    }

    /// Full Gram matrix `Z'Z`.
    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    /// Full correlation vector `Z'y`.
    pub fn zty(&self) -> &DVector<T> {
        &self.zty
    }

    /// Cached residual correlations `Z'y - Z'Z φ`.
    pub fn residual_correlations(&self) -> &DVector<T> {
        &self.corr
    }

    /// Coefficients as a dense vector over all features.
    pub fn phi_dense(&self) -> DVector<T> {
        let mut phi = DVector::zeros(self.n_features());
        for (pos, &j) in self.active.iter().enumerate() {
            phi[j] = self.phi_active[pos];
        }
        phi
    }

    /// Predicts the response for a feature row.
    pub fn predict(&self, z: &DVector<T>) -> T {
        debug_assert_eq!(z.len(), self.n_features());
        self.active
            .iter()
            .enumerate()
            .map(|(pos, &j)| z[j] * self.phi_active[pos])
            .sum()
    }

    /// `Z'y` restricted to the active set, in internal order.
    pub fn zty_active(&self) -> DVector<T> {
        DVector::from_iterator(self.active.len(), self.active.iter().map(|&j| self.zty[j]))
    }

    /// Active-coefficient signs as `+1`/`-1` scalars, in internal order.
    pub fn sign_vector(&self) -> DVector<T> {
        DVector::from_iterator(
            self.active.len(),
            self.active.iter().map(|&j| cast::<T>(f64::from(self.signs[j]))),
        )
    }

    /// Moves the penalty to `target`, following the piecewise-linear
    /// coefficient path and recording every active-set change.
    ///
    /// On `PathStalled` the model remains a valid optimum at the position
    /// reported in the error; callers can recover with
    /// [`ActiveModel::refit_at`].
    pub fn lambda_path(&mut self, target: T) -> Result<Vec<TransitionEvent<T>>, HomotopyError> {
        check_lambda(target)?;
        let events = lambda::run(self, target)?;
        self.debug_check();
        Ok(events)
    }

    /// Folds one observation `(y, z)` into the fit by scaling it
    /// continuously from weight 0 to 1, recording every active-set change
    /// (event locations are the scale factor `γ`).
    pub fn insert_observation(
        &mut self,
        y: T,
        z: &DVector<T>,
    ) -> Result<Vec<TransitionEvent<T>>, HomotopyError> {
        if z.len() != self.n_features() {
            return Err(HomotopyError::DimensionMismatch {
                expected: self.n_features(),
                got: z.len(),
            });
        }
        if !y.is_finite() || z.iter().any(|v| !v.is_finite()) {
            return Err(HomotopyError::NonFinite);
        }
        let events = gamma::run(self, y, z)?;
        self.maybe_refresh()?;
        self.debug_check();
        Ok(events)
    }

    /// One online step: moves the penalty to `lambda_new`, then folds in
    /// the observation `(y, z)`.
    ///
    /// Rank-one failures trigger one refactorize-and-retry inside the
    /// path routines; if a path still cannot be followed, the step falls
    /// back to a direct coordinate-descent refit (flagged in the
    /// outcome). A stall in the penalty stage is reported as
    /// `PathStalled` with the observation not yet absorbed; callers that
    /// want the observation regardless should then use
    /// [`ActiveModel::absorb_and_refit`].
    pub fn update(
        &mut self,
        y: T,
        z: &DVector<T>,
        lambda_new: T,
    ) -> Result<UpdateOutcome<T>, HomotopyError> {
        check_lambda(lambda_new)?;
        if z.len() != self.n_features() {
            return Err(HomotopyError::DimensionMismatch {
                expected: self.n_features(),
                got: z.len(),
            });
        }
        let mut outcome = UpdateOutcome::default();
        if lambda_new != self.lambda {
            match self.lambda_path(lambda_new) {
                Ok(events) => outcome.lambda_events = events,
                Err(HomotopyError::Linalg(_)) => {
                    self.refit_at(lambda_new)?;
                    outcome.used_fallback = true;
                }
                Err(e) => return Err(e),
            }
        }
        match self.insert_observation(y, z) {
            Ok(events) => outcome.gamma_events = events,
            Err(HomotopyError::Linalg(_)) | Err(HomotopyError::PathStalled { .. }) => {
                self.absorb_and_refit(y, z, self.lambda)?;
                outcome.used_fallback = true;
            }
            Err(e) => return Err(e),
        }
        Ok(outcome)
    }

    /// Re-solves at `lambda` by coordinate descent on the stored
    /// summaries, then rebuilds the active-set state. Used as the
    /// fallback when a path cannot be followed exactly.
    pub fn refit_at(&mut self, lambda: T) -> Result<(), HomotopyError> {
        check_lambda(lambda)?;
        let init = self.phi_dense();
        let settings = CdSettings {
            tol: 1e-11,
            max_sweeps: 500_000,
        };
        let sol = coordinate_descent_cov(&self.gram, &self.zty, lambda, Some(&init), settings)
            .map_err(|e| HomotopyError::Solver(e.to_string()))?;
        self.install_coefficients(&sol.phi, lambda)
    }

    /// Adds `(y, z)` directly to the summaries (no homotopy) and refits
    /// at `lambda` by coordinate descent. Recovery routine for callers
    /// that hit `PathStalled` but still need the observation absorbed.
    pub fn absorb_and_refit(
        &mut self,
        y: T,
        z: &DVector<T>,
        lambda: T,
    ) -> Result<(), HomotopyError> {
        if z.len() != self.n_features() {
            return Err(HomotopyError::DimensionMismatch {
                expected: self.n_features(),
                got: z.len(),
            });
        }
        if !y.is_finite() || z.iter().any(|v| !v.is_finite()) {
            return Err(HomotopyError::NonFinite);
        }
        self.gram.ger(T::one(), z, z, T::one());
        self.zty.axpy(y, z, T::one());
        self.yty += y * y;
        self.n_rows += 1;
        self.refit_at(lambda)
    }

    /// Residual sum of squares `y'y - 2 φ'Z'y + φ'Z'Z φ` at the current
    /// coefficients, computed from summaries alone.
    pub fn residual_sum_of_squares(&self) -> T {
        let phi = self.phi_dense();
        let quad = (&self.gram * &phi).dot(&phi);
        let cross = self.zty.dot(&phi);
        (self.yty - cross - cross + quad).max(T::zero())
    }

    /// Verifies the optimality conditions and cached state at tolerance
    /// `tol`: active features must have residual correlation `λ·sign`
    /// and matching coefficient sign; inactive features must have
    /// `|correlation| ≤ λ + tol`. The tolerance is scaled by `1 + λ`,
    /// since the boundary magnitude sets the scale of every comparison.
    /// Returns a description of the first violation, if any.
    pub fn check_consistency(&self, tol: f64) -> Result<(), String> {
        let tol_t = cast::<T>(tol) * (T::one() + self.lambda);
        let phi = self.phi_dense();
        let fresh = &self.zty - &self.gram * &phi;
        for j in 0..self.n_features() {
            if (fresh[j] - self.corr[j]).abs() > tol_t {
                return Err(format!(
                    "stale correlation cache at feature {j}: cached {}, fresh {}",
                    to_f64(self.corr[j]),
                    to_f64(fresh[j])
                ));
            }
        }
        for (pos, &j) in self.active.iter().enumerate() {
            let v = cast::<T>(f64::from(self.signs[j]));
            if self.signs[j] == 0 {
                return Err(format!("active feature {j} has zero recorded sign"));
            }
            if (fresh[j] - self.lambda * v).abs() > tol_t {
                return Err(format!(
                    "active feature {j} off the boundary: correlation {}, expected {}",
                    to_f64(fresh[j]),
                    to_f64(self.lambda * v)
                ));
            }
            let coef = self.phi_active[pos];
            if coef * v < -tol_t {
                return Err(format!(
                    "active feature {j} has coefficient {} against sign {}",
                    to_f64(coef),
                    self.signs[j]
                ));
            }
        }
        for j in 0..self.n_features() {
            if self.signs[j] == 0 && fresh[j].abs() > self.lambda + tol_t {
                return Err(format!(
                    "inactive feature {j} violates the bound: |{}| > {}",
                    to_f64(fresh[j]),
                    to_f64(self.lambda)
                ));
            }
        }
        Ok(())
    }

    // ----- internal helpers shared by the path routines -----

    /// Active block of the Gram matrix in internal order.
    pub(crate) fn gram_active(&self) -> DMatrix<T> {
        let k = self.active.len();
        DMatrix::from_fn(k, k, |r, c| self.gram[(self.active[r], self.active[c])])
    }

    /// Column `j` of the Gram matrix restricted to the active set.
    pub(crate) fn gram_cross(&self, j: usize) -> DVector<T> {
        DVector::from_iterator(self.active.len(), self.active.iter().map(|&i| self.gram[(i, j)]))
    }

    /// `Z'Z[:, A] · w` for a vector `w` over the active set: the dense
    /// correlation response of every feature to active coefficients `w`.
    pub(crate) fn gram_times_active(&self, w: &DVector<T>) -> DVector<T> {
        let mut out = DVector::zeros(self.n_features());
        for (pos, &j) in self.active.iter().enumerate() {
            out.axpy(w[pos], &self.gram.column(j).clone_owned(), T::one());
        }
        out
    }

    /// Rebuilds `ginv` from the stored Gram matrix. Used after rank-one
    /// failures and periodically to shed accumulated roundoff.
    pub(crate) fn refactorize(&mut self) -> Result<(), LinalgError> {
        self.ginv.refresh_from(&self.gram_active())
    }

    fn maybe_refresh(&mut self) -> Result<(), HomotopyError> {
        if self.ginv.updates_since_refresh() >= REFRESH_INTERVAL && !self.active.is_empty() {
            self.refactorize()?;
        }
        Ok(())
    }

    /// Installs a dense coefficient vector as the model state, deriving
    /// the active set from its support and refactorizing the inverse.
    fn install_coefficients(&mut self, phi: &DVector<T>, lambda: T) -> Result<(), HomotopyError> {
        let guard = cast::<T>(GUARD_TOL);
        self.active.clear();
        self.signs = vec![0; self.n_features()];
        for j in 0..self.n_features() {
            if phi[j].abs() > guard {
                self.active.push(j);
                self.signs[j] = if phi[j] > T::zero() { 1 } else { -1 };
            }
        }
        self.ginv = GramInverse::from_gram(&self.gram_active())?;
        self.lambda = lambda;
        // Polish the coordinate-descent iterate to the exact active-set
        // solution so downstream path segments start from a clean optimum.
        let rhs = self.zty_active() - self.sign_vector() * lambda;
        self.phi_active = self.ginv.mul_vec(&rhs);
        self.snap_tiny_coefficients();
        self.recompute_corr();
        self.debug_check();
        Ok(())
    }

    /// Drops active features whose polished coefficient collapsed to zero
    /// or crossed its recorded sign by a negligible amount (roundoff at a
    /// breakpoint that lands exactly on the path endpoint).
    pub(crate) fn snap_tiny_coefficients(&mut self) {
        let scale = self.phi_active.amax().max(T::one());
        let tol = cast::<T>(1e-9) * scale;
        loop {
            let mut victim = None;
            for (pos, &j) in self.active.iter().enumerate() {
                let v = cast::<T>(f64::from(self.signs[j]));
                if self.phi_active[pos] * v <= T::zero() {
                    if self.phi_active[pos].abs() <= tol {
                        victim = Some(pos);
                        break;
                    }
                }
            }
            match victim {
                Some(pos) => {
                    let j = self.active[pos];
                    if self.ginv.remove_feature(pos).is_err() {
                        // The inverse block is too ill-conditioned for an
                        // incremental removal; rebuild it from the Gram
                        // matrix without the feature.
                        self.active.remove(pos);
                        self.signs[j] = 0;
                        if self.refactorize().is_err() {
                            return;
                        }
                    } else {
                        self.active.remove(pos);
                        self.signs[j] = 0;
                    }
                    let rhs = self.zty_active() - self.sign_vector() * self.lambda;
                    self.phi_active = self.ginv.mul_vec(&rhs);
                }
                None => return,
            }
        }
    }

    pub(crate) fn recompute_corr(&mut self) {
        self.corr = &self.zty - self.gram_times_active(&self.phi_active);
    }

    /// Closes out a path at `lambda`: evaluates the active-set solution
    /// `K (Z'y|_A - λ v)` there, drops coefficients that landed on zero,
    /// and refreshes the correlation cache.
    pub(crate) fn finalize_at(&mut self, lambda: T) {
        self.lambda = lambda;
        let rhs = self.zty_active() - self.sign_vector() * lambda;
        self.phi_active = self.ginv.mul_vec(&rhs);
        self.snap_tiny_coefficients();
        self.recompute_corr();
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            if let Err(msg) = self.check_consistency(1e-5) {
                panic!("model left inconsistent: {msg}");
            }
        }
    }
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<(), HomotopyError> {
    if !lambda.is_finite() || lambda <= T::zero() {
        return Err(HomotopyError::InvalidPenalty(to_f64(lambda)));
    }
    Ok(())
}

/// A prospective path breakpoint, shared by the two path drivers.
pub(crate) struct Candidate<T> {
    /// Path position of the breakpoint (a penalty value or a weight).
    pub location: T,
    /// Distance from the current position, always positive.
    pub step: T,
    pub kind: EventKind,
    pub feature: usize,
    /// Position in the active ordering (leave events only).
    pub pos: usize,
    /// Boundary sign reached (enter events only).
    pub sign: i8,
}

/// Picks `cand` over `incumbent` when it is strictly nearer, or on a tie
/// (within the event nudge) by the deterministic rule: leaves before
/// enters, then the lower feature index.
pub(crate) fn beats<T: Scalar>(
    cand: &Candidate<T>,
    incumbent: &Option<Candidate<T>>,
    tie: T,
) -> bool {
    match incumbent {
        None => true,
        Some(inc) => {
            let gap = cand.step - inc.step;
            if gap.abs() <= tie {
                match (cand.kind, inc.kind) {
                    (EventKind::FeatureLeaves, EventKind::FeatureEnters) => true,
                    (EventKind::FeatureEnters, EventKind::FeatureLeaves) => false,
                    _ => cand.feature < inc.feature,
                }
            } else {
                gap < T::zero()
            }
        }
    }
}
