//! Observation homotopy: folds one new observation `(y₁, z₁)` into an
//! [`ActiveModel`] by scaling it continuously into the fit.
//!
//! The scaled problem adds `(γ·y₁, γ·z₁)` to the data, which enters the
//! normal equations only through the weight `μ = γ²`: the Gram block
//! becomes `G_AA + μ·z_A z_A'` and the correlation vector
//! `Z'y + μ·y₁·z`. Driving `μ` from 0 to 1 traces a solution path whose
//! segments are rational in `μ` with a single shared pole, so the next
//! active-set change on each segment has a closed form. Between events
//! the inverse Gram block is advanced with one rank-one update; at `μ = 1`
//! the observation is absorbed into the stored summaries. Event locations
//! are reported on the `γ = √μ` scale.

use nalgebra::DVector;

use super::{
    beats, ActiveModel, Candidate, EventKind, HomotopyError, TransitionEvent, EVENT_NUDGE,
    PIN_TOL, REENTRY_WINDOW, STALL_FACTOR,
};
use crate::linalg::{LinalgError, GUARD_TOL};
use crate::scalar::{cast, to_f64, Scalar};

pub(super) fn run<T: Scalar>(
    model: &mut ActiveModel<T>,
    y1: T,
    z: &DVector<T>,
) -> Result<Vec<TransitionEvent<T>>, HomotopyError> {
    let m = model.n_features();
    let nudge = cast::<T>(EVENT_NUDGE);
    let guard = cast::<T>(GUARD_TOL);
    let reentry = cast::<T>(REENTRY_WINDOW);
    let pin_tol = cast::<T>(PIN_TOL) * (T::one() + model.lambda);
    let max_events = STALL_FACTOR * m;
    let lambda = model.lambda;
    let one = T::one();
    let mut events: Vec<TransitionEvent<T>> = Vec::new();
    let mut skip = vec![false; m];
    // Weight at which each feature last left the active set. The exiting
    // correlation sits exactly on the boundary there, so a crossing solve
    // pointing back into that window is rounding noise unless the segment
    // slope confirms the slack genuinely moves outward.
    let mut left_at: Vec<Option<T>> = vec![None; m];
    // Symmetrically, the weight at which each feature last entered: the
    // fresh coefficient is zero plus rounding noise there, so a leave
    // crossing inside that window needs the slope to confirm the
    // coefficient genuinely moves against its sign. Honouring a phantom
    // leave strands the correlation on the boundary; dropping a genuine
    // one lets a wrong-signed coefficient ride to the end of the path.
    let mut entered_at: Vec<Option<T>> = vec![None; m];
    let mut mu = T::zero();

    loop {
        // New observation restricted to the active set, in internal order.
        let z_a = DVector::<T>::from_iterator(
            model.active.len(),
            model.active.iter().map(|&j| z[j]),
        );

        let admissible = |loc: T| -> Option<T> {
            if !loc.is_finite() {
                return None;
            }
            let step = loc - mu;
            if step > nudge && loc <= one {
                Some(step)
            } else {
                None
            }
        };

        let mut best: Option<Candidate<T>> = None;
        if model.active.is_empty() {
            // With no active features the coefficients stay zero and each
            // correlation is affine in the weight: c_j(μ) = Z'y_j + μ·z_j·y₁.
            //
            // Corrective pass: a correlation already past the boundary (a
            // violation that slipped through an earlier segment), or
            // pinned exactly on it and pushed outward, must enter right
            // here — its crossing solves to the current weight, which the
            // forward-progress filter would drop, and the violation would
            // otherwise grow for the rest of the path.
            'corrective_affine: for feature in 0..m {
                if skip[feature] {
                    continue;
                }
                let slope = z[feature] * y1;
                let c0 = model.zty[feature] + mu * slope;
                for sign in [1i8, -1] {
                    let sig = cast::<T>(f64::from(sign));
                    let slack = sig * c0 - lambda;
                    if slack > pin_tol
                        || (slack.abs() <= pin_tol && sig * slope > T::zero())
                    {
                        best = Some(Candidate {
                            location: mu,
                            step: T::zero(),
                            kind: EventKind::FeatureEnters,
                            feature,
                            pos: usize::MAX,
                            sign,
                        });
                        break 'corrective_affine;
                    }
                }
            }
            if best.is_none() {
                for feature in 0..m {
                    if skip[feature] {
                        continue;
                    }
                    let slope = z[feature] * y1;
                    if slope.abs() <= guard {
                        continue;
                    }
                    for sign in [1i8, -1] {
                        let sig = cast::<T>(f64::from(sign));
                        let loc = (sig * lambda - model.zty[feature]) / slope;
                        // A crossing within the re-entry window of the
                        // feature's last exit is a rounding phantom unless
                        // the slack genuinely moves outward there.
                        if matches!(left_at[feature], Some(at) if loc - at <= reentry)
                            && sig * slope <= T::zero()
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
        } else {
            // Segment geometry at base weight μ: with K the inverse of
            // G_AA + μ·z_A z_A', u = K z_A and a = z_A' u, the optimum a
            // step δ further is φ(μ+δ) = w0 + δ·g·u / (1 + δ·a), where
            // w0 is the optimum at μ and g the residual of the new
            // observation there.
            let u = model.ginv.mul_vec(&z_a);
            let a = z_a.dot(&u);
            let mut rhs = model.zty_active();
            rhs.axpy(mu * y1, &z_a, one);
            rhs -= model.sign_vector() * lambda;
            let w0 = model.ginv.mul_vec(&rhs);
            let r0 = z_a.dot(&w0);
            let g = y1 - r0;

            // Corrective pass: a coefficient already on the wrong side of
            // zero (a violation that slipped through an earlier segment),
            // or pinned at zero with its segment motion opposing its
            // sign, must leave right here — the crossing solve places
            // that event at the current weight, which the forward-progress
            // filter would drop. Along the segment the coefficient moves
            // as δ·g·u_i to first order.
            let coef_tol = cast::<T>(PIN_TOL)
                * (one + w0.iter().fold(T::zero(), |acc, &v| acc.max(v.abs())));
            for (pos, &feature) in model.active.iter().enumerate() {
                let v = cast::<T>(f64::from(model.signs[feature]));
                let against = v * w0[pos] < -coef_tol;
                let pinned = w0[pos].abs() <= coef_tol && v * g * u[pos] < T::zero();
                if against || pinned {
                    best = Some(Candidate {
                        location: mu,
                        step: T::zero(),
                        kind: EventKind::FeatureLeaves,
                        feature,
                        pos,
                        sign: 0,
                    });
                    break;
                }
            }

            let gw = model.gram_times_active(&w0);
            let gu = model.gram_times_active(&u);
            if best.is_none() {
                // Corrective pass: an inactive correlation already past
                // the boundary, or pinned on it and pushed outward (c_j
                // moves as -δ·g·d_j to first order), enters with a
                // zero-length step.
                'corrective: for feature in 0..m {
                    if model.signs[feature] != 0 || skip[feature] {
                        continue;
                    }
                    let c0 = model.zty[feature] + mu * z[feature] * g - gw[feature];
                    let d = gu[feature] + mu * z[feature] * a - z[feature];
                    for sign in [1i8, -1] {
                        let sig = cast::<T>(f64::from(sign));
                        let slack = sig * c0 - lambda;
                        if slack > pin_tol
                            || (slack.abs() <= pin_tol && sig * g * d < T::zero())
                        {
                            best = Some(Candidate {
                                location: mu,
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
                // Active coefficients crossing zero. A crossing within
                // the re-entry window of the feature's own entry is a
                // rounding phantom unless the coefficient genuinely moves
                // against its sign there.
                for (pos, &feature) in model.active.iter().enumerate() {
                    let denom = w0[pos] * a + g * u[pos];
                    if denom.abs() <= guard {
                        continue;
                    }
                    let loc = mu - w0[pos] / denom;
                    let v = cast::<T>(f64::from(model.signs[feature]));
                    if matches!(entered_at[feature], Some(at) if loc - at <= reentry)
                        && v * g * u[pos] >= T::zero()
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
                // Inactive correlations touching the boundary. Along the
                // segment c_j(μ+δ) = c0_j - δ·g·d_j / (1 + δ·a).
                for feature in 0..m {
                    if model.signs[feature] != 0 || skip[feature] {
                        continue;
                    }
                    let c0 = model.zty[feature] + mu * z[feature] * g - gw[feature];
                    let d = gu[feature] + mu * z[feature] * a - z[feature];
                    for sign in [1i8, -1] {
                        let sig = cast::<T>(f64::from(sign));
                        let num = c0 - sig * lambda;
                        let denom = num * a - g * d;
                        if denom.abs() <= guard {
                            continue;
                        }
                        let loc = mu - num / denom;
                        // Within the re-entry window of the feature's last
                        // exit, honour the crossing only when the slack
                        // genuinely moves outward there.
                        if matches!(left_at[feature], Some(at) if loc - at <= reentry)
                            && sig * g * d >= T::zero()
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
        }

        let Some(event) = best else {
            // No further active-set changes: scale the observation the
            // rest of the way in and absorb it into the summaries.
            let rest = one - mu;
            if !model.active.is_empty() && rest > T::zero() {
                advance_with_retry(model, &z_a, mu, rest)?;
            }
            model.gram.ger(one, z, z, one);
            model.zty.axpy(y1, z, one);
            model.yty += y1 * y1;
            model.n_rows += 1;
            model.finalize_at(lambda);
            return Ok(events);
        };

        let mu_evt = event.location;
        if !model.active.is_empty() {
            advance_with_retry(model, &z_a, mu, mu_evt - mu)?;
        }
        match event.kind {
            EventKind::FeatureLeaves => {
                match model.ginv.remove_feature(event.pos) {
                    Ok(()) => {}
                    Err(_) => {
                        refresh_at(model, &z_a, mu_evt)?;
                        model.ginv.remove_feature(event.pos)?;
                    }
                }
                model.signs[event.feature] = 0;
                model.active.remove(event.pos);
                left_at[event.feature] = Some(mu_evt);
            }
            EventKind::FeatureEnters => {
                // Cross terms against the active set include the partially
                // scaled observation at weight μ_evt.
                let mut cross = model.gram_cross(event.feature);
                cross.axpy(mu_evt * z[event.feature], &z_a, one);
                let self_inner = model.gram[(event.feature, event.feature)]
                    + mu_evt * z[event.feature] * z[event.feature];
                match add_with_retry(model, &z_a, mu_evt, &cross, self_inner) {
                    Ok(()) => {
                        model.active.push(event.feature);
                        model.signs[event.feature] = event.sign;
                        entered_at[event.feature] = Some(mu_evt);
                    }
                    Err(LinalgError::DegenerateFeature { .. }) => {
                        // Numerically collinear with the active set at this
                        // weight; exclude it and keep scanning from here.
                        skip[event.feature] = true;
                        mu = mu_evt;
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        events.push(TransitionEvent {
            kind: event.kind,
            feature: event.feature,
            location: mu_evt.sqrt(),
        });
        skip.iter_mut().for_each(|s| *s = false);
        mu = mu_evt;
        if events.len() > max_events {
            // Leave the cached coefficients sized to the active set (the
            // partial-weight optimum at the stall position) so fallback
            // refits can warm-start from a coherent state.
            let z_a = DVector::<T>::from_iterator(
                model.active.len(),
                model.active.iter().map(|&j| z[j]),
            );
            let mut rhs = model.zty_active();
            rhs.axpy(mu * y1, &z_a, one);
            rhs -= model.sign_vector() * lambda;
            model.phi_active = model.ginv.mul_vec(&rhs);
            return Err(HomotopyError::PathStalled {
                events: events.len(),
                position: to_f64(mu.sqrt()),
            });
        }
    }
}

/// Rebuilds the inverse from the stored Gram block plus the partially
/// scaled observation at weight `mu`.
fn refresh_at<T: Scalar>(
    model: &mut ActiveModel<T>,
    z_a: &DVector<T>,
    mu: T,
) -> Result<(), LinalgError> {
    let mut ga = model.gram_active();
    ga.ger(mu, z_a, z_a, T::one());
    model.ginv.refresh_from(&ga)
}

/// Advances the inverse by `delta` more weight on the new observation,
/// refactorizing once if the rank-one form breaks down.
fn advance_with_retry<T: Scalar>(
    model: &mut ActiveModel<T>,
    z_a: &DVector<T>,
    mu_now: T,
    delta: T,
) -> Result<(), LinalgError> {
    if delta <= T::zero() {
        return Ok(());
    }
    match model.ginv.observation_update(z_a, delta) {
        Ok(()) => Ok(()),
        Err(_) => {
            refresh_at(model, z_a, mu_now)?;
            model.ginv.observation_update(z_a, delta)
        }
    }
}

fn add_with_retry<T: Scalar>(
    model: &mut ActiveModel<T>,
    z_a: &DVector<T>,
    mu: T,
    cross: &DVector<T>,
    self_inner: T,
) -> Result<(), LinalgError> {
    match model.ginv.add_feature(cross, self_inner) {
        Ok(()) => Ok(()),
        Err(_) => {
            refresh_at(model, z_a, mu)?;
            model.ginv.add_feature(cross, self_inner)
        }
    }
}
