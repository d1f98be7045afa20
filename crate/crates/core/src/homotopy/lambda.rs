//! Penalty homotopy: moves an [`ActiveModel`] from its current penalty to a
//! target penalty along the piecewise-linear solution path.
//!
//! On a fixed active set `A` with signs `v`, the optimum is affine in the
//! penalty: `φ_A(λ) = w_b - λ·d` with `w_b = K Z'y|_A` and `d = K v`
//! (`K` the inverse active Gram block). Residual correlations are then
//! affine too, `c_j(λ) = cb_j + λ·e_j`. The path driver repeatedly finds
//! the nearest penalty value at which either an active coefficient hits
//! zero (feature leaves) or an inactive correlation hits the boundary
//! `±λ` (feature enters), applies that active-set change with a rank-one
//! update, and continues until the target is reached.

use nalgebra::DVector;

use super::{
    beats, ActiveModel, Candidate, EventKind, HomotopyError, TransitionEvent, EVENT_NUDGE,
    PIN_TOL, REENTRY_WINDOW, STALL_FACTOR,
};
use crate::linalg::{LinalgError, GUARD_TOL};
use crate::scalar::{cast, to_f64, Scalar};

pub(super) fn run<T: Scalar>(
    model: &mut ActiveModel<T>,
    target: T,
) -> Result<Vec<TransitionEvent<T>>, HomotopyError> {
    let m = model.n_features();
    let nudge = cast::<T>(EVENT_NUDGE);
    let guard = cast::<T>(GUARD_TOL);
    let reentry = cast::<T>(REENTRY_WINDOW);
    let max_events = STALL_FACTOR * m;
    let mut events: Vec<TransitionEvent<T>> = Vec::new();
    // Candidates whose rank-one insertion proved degenerate on the current
    // segment; cleared whenever the active set actually changes.
    let mut skip = vec![false; m];
    // Penalty at which each feature last left the active set. The exiting
    // correlation sits exactly on the boundary there, so a crossing solve
    // pointing back into that window is rounding noise unless the segment
    // slope confirms the slack genuinely grows along the travel direction.
    let mut left_at: Vec<Option<T>> = vec![None; m];
    // Symmetrically, the penalty at which each feature last entered: the
    // fresh coefficient is zero plus rounding noise there, so a leave
    // crossing inside that window needs the slope to confirm the
    // coefficient genuinely moves against its sign.
    let mut entered_at: Vec<Option<T>> = vec![None; m];

    loop {
        let from = model.lambda;
        if target == from {
            // Nothing to traverse; refresh the cached state and stop before
            // the boundary passes below can manufacture zero-length events.
            model.finalize_at(target);
            return Ok(events);
        }
        let dir = if target >= from { T::one() } else { -T::one() };
        // Affine segment geometry at the current active set.
        let w_b = model.ginv.mul_vec(&model.zty_active());
        let dvec = model.ginv.mul_vec(&model.sign_vector());
        let gw = model.gram_times_active(&w_b);
        let ge = model.gram_times_active(&dvec);

        // A breakpoint is admissible when it lies strictly beyond the
        // current position (by more than the nudge, so a just-processed
        // event is not rediscovered) and not past the target.
        let admissible = |loc: T| -> Option<T> {
            if !loc.is_finite() {
                return None;
            }
            let step = (loc - from) * dir;
            if step > nudge && (target - loc) * dir >= T::zero() {
                Some(step)
            } else {
                None
            }
        };

        let mut best: Option<Candidate<T>> = None;

        // Corrective pass: a coefficient already on the wrong side of
        // zero (a violation that slipped through an earlier segment), or
        // sitting exactly at zero with its motion along this segment
        // opposing its recorded sign, must leave right here. The crossing
        // solve places that event at the current penalty, which the
        // forward-progress filter would drop, so the violation would grow
        // for the rest of the segment instead. φ moves as -d per unit
        // penalty, so the move is infeasible when v·d·dir > 0.
        let coef_scale = (0..model.active.len()).fold(T::zero(), |acc, pos| {
            acc.max((w_b[pos] - from * dvec[pos]).abs())
        });
        let coef_tol = cast::<T>(PIN_TOL) * (T::one() + coef_scale);
        for (pos, &feature) in model.active.iter().enumerate() {
            let v = cast::<T>(f64::from(model.signs[feature]));
            let phi0 = w_b[pos] - from * dvec[pos];
            let against = v * phi0 < -coef_tol;
            let pinned = phi0.abs() <= coef_tol && v * dvec[pos] * dir > T::zero();
            if against || pinned {
                best = Some(Candidate {
                    location: from,
                    step: T::zero(),
                    kind: EventKind::FeatureLeaves,
                    feature,
                    pos,
                    sign: 0,
                });
                break;
            }
        }

        // Corrective pass: an inactive correlation already past the
        // boundary |c| = λ, or pinned on it with the slack growing in the
        // direction of travel, enters right here, for the same reason:
        // the crossing solve lands on the current penalty. The slack
        // sig·c(λ) - λ moves as sig·e - 1 per unit penalty. A model
        // fitted at exactly the critical penalty starts in the pinned
        // state.
        let pin_tol = cast::<T>(PIN_TOL) * (T::one() + from.abs());
        if best.is_none() {
            'corrective: for feature in 0..m {
                if model.signs[feature] != 0 || skip[feature] {
                    continue;
                }
                let c0 = model.zty[feature] - gw[feature] + from * ge[feature];
                for sign in [1i8, -1] {
                    let sig = cast::<T>(f64::from(sign));
                    let slack = sig * c0 - from;
                    if slack > pin_tol
                        || (slack.abs() <= pin_tol
                            && (sig * ge[feature] - T::one()) * dir > T::zero())
                    {
                        best = Some(Candidate {
                            location: from,
                            step: T::zero(),
                            kind: EventKind::FeatureEnters,
                            feature,
                            pos: usize::MAX,
                            sign,
                        });
                        break 'corrective;
                    }
                }
            }
        }

        if best.is_none() {
            // Active coefficients crossing zero: φ_i(λ) = w_b[i] - λ·d[i].
            // A crossing within the re-entry window of the feature's own
            // entry is a rounding phantom unless the coefficient genuinely
            // moves against its sign there.
            for (pos, &feature) in model.active.iter().enumerate() {
                if dvec[pos].abs() <= guard {
                    continue;
                }
                let loc = w_b[pos] / dvec[pos];
                let v = cast::<T>(f64::from(model.signs[feature]));
                if matches!(entered_at[feature], Some(at) if (loc - at).abs() <= reentry * (T::one() + at.abs()))
                    && v * dvec[pos] * dir <= T::zero()
                {
                    continue;
                }
                if let Some(step) = admissible(loc) {
                    let cand = Candidate {
                        location: loc,
                        step,
                        kind: EventKind::FeatureLeaves,
                        feature,
                        pos,
                        sign: 0,
                    };
                    if beats(&cand, &best, nudge) {
                        best = Some(cand);
                    }
                }
            }
            // Inactive correlations touching the boundary: cb_j + λ·e_j = ±λ.
            for feature in 0..m {
                if model.signs[feature] != 0 || skip[feature] {
                    continue;
                }
                let cb = model.zty[feature] - gw[feature];
                let e = ge[feature];
                for sign in [1i8, -1] {
                    let sig = cast::<T>(f64::from(sign));
                    let denom = sig - e;
                    if denom.abs() <= guard {
                        continue;
                    }
                    let loc = cb / denom;
                    // Within the re-entry window of the feature's last
                    // exit, honour the crossing only when the slack
                    // genuinely grows in the direction of travel.
                    if matches!(left_at[feature], Some(at) if (loc - at).abs() <= reentry * (T::one() + at.abs()))
                        && (sig * e - T::one()) * dir <= T::zero()
                    {
                        continue;
                    }
                    if let Some(step) = admissible(loc) {
                        let cand = Candidate {
                            location: loc,
                            step,
                            kind: EventKind::FeatureEnters,
                            feature,
                            pos: usize::MAX,
                            sign,
                        };
                        if beats(&cand, &best, nudge) {
                            best = Some(cand);
                        }
                    }
                }
            }
        }

        let Some(event) = best else {
            // No more breakpoints before the target: finish the segment.
            model.finalize_at(target);
            return Ok(events);
        };

        match event.kind {
            EventKind::FeatureLeaves => {
                remove_with_retry(model, event.pos)?;
                model.signs[event.feature] = 0;
                model.active.remove(event.pos);
                left_at[event.feature] = Some(event.location);
            }
            EventKind::FeatureEnters => {
                let cross = model.gram_cross(event.feature);
                let self_inner = model.gram[(event.feature, event.feature)];
                match add_with_retry(model, &cross, self_inner) {
                    Ok(()) => {
                        model.active.push(event.feature);
                        model.signs[event.feature] = event.sign;
                        entered_at[event.feature] = Some(event.location);
                    }
                    Err(LinalgError::DegenerateFeature { .. }) => {
                        // The candidate is numerically collinear with the
                        // active set; exclude it for the rest of this
                        // segment and look for the next breakpoint.
                        skip[event.feature] = true;
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        model.lambda = event.location;
        events.push(TransitionEvent {
            kind: event.kind,
            feature: event.feature,
            location: event.location,
        });
        skip.iter_mut().for_each(|s| *s = false);
        if events.len() > max_events {
            // Leave the model as a valid optimum at the stall position so
            // callers can recover with a direct refit.
            model.finalize_at(model.lambda);
            return Err(HomotopyError::PathStalled {
                events: events.len(),
                position: to_f64(model.lambda),
            });
        }
    }
}

fn remove_with_retry<T: Scalar>(model: &mut ActiveModel<T>, pos: usize) -> Result<(), LinalgError> {
    match model.ginv.remove_feature(pos) {
        Ok(()) => Ok(()),
        Err(_) => {
            model.refactorize()?;
            model.ginv.remove_feature(pos)
        }
    }
}

fn add_with_retry<T: Scalar>(
    model: &mut ActiveModel<T>,
    cross: &DVector<T>,
    self_inner: T,
) -> Result<(), LinalgError> {
    match model.ginv.add_feature(cross, self_inner) {
        Ok(()) => Ok(()),
        Err(_) => {
            model.refactorize()?;
            model.ginv.add_feature(cross, self_inner)
        }
    }
}
