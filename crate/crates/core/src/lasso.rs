//! Batch lasso solver and optimality checks.
//!
//! Coordinate descent here is the crate's reference solver: the homotopy
//! engine is validated against it everywhere, and falls back to it when a
//! path degenerates. It runs on the covariance form (Gram matrix and
//! feature-response correlations), so it can refit a model from the same
//! sufficient statistics the online engine maintains.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::GramInverse;
use crate::scalar::{cast, to_f64, Scalar};

#[derive(Debug, Clone, Error)]
pub enum LassoError<T: Scalar> {
    #[error("invalid problem: {reason}")]
    InvalidProblem { reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Sweep cap reached. Carries the best iterate so callers can degrade
    /// gracefully; `kkt_residual` is the largest stationarity violation.
    #[error("no convergence after {sweeps} sweeps (last max delta {max_delta:.3e}, kkt residual {kkt_residual:.3e})")]
    NoConvergence { sweeps: usize, max_delta: f64, kkt_residual: f64, solution: LassoSolution<T> },
}

/// An l1-penalized least-squares instance:
/// minimize over phi `0.5 * ||y - Z phi||^2 + lambda * ||phi||_1`.
#[derive(Debug, Clone)]
pub struct LassoProblem<T: Scalar> {
    z: DMatrix<T>,
    y: DVector<T>,
    lambda: T,
}

impl<T: Scalar> LassoProblem<T> {
    pub fn new(z: DMatrix<T>, y: DVector<T>, lambda: T) -> Result<Self, LassoError<T>> {
        if z.nrows() == 0 || z.ncols() == 0 {
            return Err(LassoError::InvalidProblem { reason: "empty design matrix".into() });
        }
        if z.nrows() != y.len() {
            return Err(LassoError::DimensionMismatch { expected: z.nrows(), got: y.len() });
        }
        if lambda < T::zero() {
            return Err(LassoError::InvalidProblem { reason: "negative penalty".into() });
        }
        if z.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(LassoError::InvalidProblem { reason: "non-finite entries".into() });
        }
        Ok(Self { z, y, lambda })
    }

    pub fn z(&self) -> &DMatrix<T> {
        &self.z
    }

    pub fn y(&self) -> &DVector<T> {
        &self.y
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.z.nrows()
    }

    pub fn m(&self) -> usize {
        self.z.ncols()
    }

    /// `0.5 * ||y - Z phi||^2 + lambda * ||phi||_1`.
    pub fn objective(&self, phi: &DVector<T>) -> T {
        let resid = &self.y - &self.z * phi;
        let l1: T = phi.iter().map(|v| v.abs()).sum();
        cast::<T>(0.5) * resid.dot(&resid) + self.lambda * l1
    }
}

/// A lasso solution with its support bookkeeping. `signs` is full-length
/// with entries in {-1, 0, 1}; `active` lists the nonzero coordinates in
/// ascending order.
#[derive(Debug, Clone)]
pub struct LassoSolution<T: Scalar> {
    pub phi: DVector<T>,
    pub active: Vec<usize>,
    pub signs: Vec<i8>,
    pub sweeps: usize,
}

impl<T: Scalar> LassoSolution<T> {
    fn from_phi(phi: DVector<T>, sweeps: usize) -> Self {
        let mut active = Vec::new();
        let mut signs = vec![0i8; phi.len()];
        for (j, &v) in phi.iter().enumerate() {
            if v > T::zero() {
                active.push(j);
                signs[j] = 1;
            } else if v < T::zero() {
                active.push(j);
                signs[j] = -1;
            }
        }
        Self { phi, active, signs, sweeps }
    }
}

/// Convergence controls for [`coordinate_descent`]. `tol` bounds the largest
/// coefficient change across one full sweep.
#[derive(Debug, Clone, Copy)]
pub struct CdSettings {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for CdSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_sweeps: 100_000 }
    }
}

pub fn soft_threshold<T: Scalar>(x: T, lambda: T) -> T {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        T::zero()
    }
}

/// Cyclic coordinate descent on the row form of the problem.
pub fn coordinate_descent<T: Scalar>(
    p: &LassoProblem<T>,
    init: Option<&DVector<T>>,
    settings: CdSettings,
) -> Result<LassoSolution<T>, LassoError<T>> {
    let gram = p.z.transpose() * &p.z;
    let zty = p.z.transpose() * &p.y;
    coordinate_descent_cov(&gram, &zty, p.lambda, init, settings)
}

/// Cyclic coordinate descent on the covariance form: `gram = Z'Z`,
/// `zty = Z'y`. Minimizes `0.5 phi' G phi - zty' phi + lambda ||phi||_1`,
/// which matches the row form up to the constant `0.5 ||y||^2`.
pub fn coordinate_descent_cov<T: Scalar>(
    gram: &DMatrix<T>,
    zty: &DVector<T>,
    lambda: T,
    init: Option<&DVector<T>>,
    settings: CdSettings,
) -> Result<LassoSolution<T>, LassoError<T>> {
    let m = gram.ncols();
    if gram.nrows() != m {
        return Err(LassoError::DimensionMismatch { expected: m, got: gram.nrows() });
    }
    if zty.len() != m {
        return Err(LassoError::DimensionMismatch { expected: m, got: zty.len() });
    }
    let mut phi = match init {
        Some(v) if v.len() == m => v.clone(),
        Some(v) => return Err(LassoError::DimensionMismatch { expected: m, got: v.len() }),
        None => DVector::zeros(m),
    };
    // grad = zty - G phi, i.e. the residual correlations.
    let mut grad = if phi.iter().all(|v| *v == T::zero()) {
        zty.clone()
    } else {
        zty - gram * &phi
    };
    let tol = cast::<T>(settings.tol);
    let mut last_delta = T::zero();
    for sweep in 1..=settings.max_sweeps {
        let mut max_delta = T::zero();
        for j in 0..m {
            let gjj = gram[(j, j)];
            if gjj <= T::zero() {
                continue;
            }
            let rho = grad[j] + gjj * phi[j];
            let new = soft_threshold(rho, lambda) / gjj;
            let delta = new - phi[j];
            if delta != T::zero() {
                for (g, coef) in grad.iter_mut().zip(gram.column(j).iter()) {
                    *g -= *coef * delta;
                }
                phi[j] = new;
                if delta.abs() > max_delta {
                    max_delta = delta.abs();
                }
            }
        }
        if max_delta < tol {
            return Ok(LassoSolution::from_phi(phi, sweep));
        }
        last_delta = max_delta;
    }
    let kkt_residual = stationarity_residual(&grad, &phi, lambda);
    Err(LassoError::NoConvergence {
        sweeps: settings.max_sweeps,
        max_delta: to_f64(last_delta),
        kkt_residual: to_f64(kkt_residual),
        solution: LassoSolution::from_phi(phi, settings.max_sweeps),
    })
}

fn stationarity_residual<T: Scalar>(grad: &DVector<T>, phi: &DVector<T>, lambda: T) -> T {
    let mut worst = T::zero();
    for j in 0..phi.len() {
        let v = if phi[j] == T::zero() {
            let excess = grad[j].abs() - lambda;
            if excess > T::zero() {
                excess
            } else {
                T::zero()
            }
        } else {
            (grad[j] - lambda * phi[j].signum()).abs()
        };
        if v > worst {
            worst = v;
        }
    }
    worst
}

/// Closed-form solution on a fixed support: `phi_A = K (Z_A' y - lambda v_A)`
/// with `K` the inverse Gram of the active columns.
pub fn active_set_solution<T: Scalar>(
    p: &LassoProblem<T>,
    active: &[usize],
    signs: &[i8],
    ginv: &GramInverse<T>,
) -> Result<DVector<T>, LassoError<T>> {
    if ginv.dim() != active.len() {
        return Err(LassoError::DimensionMismatch { expected: active.len(), got: ginv.dim() });
    }
    if signs.len() != p.m() {
        return Err(LassoError::DimensionMismatch { expected: p.m(), got: signs.len() });
    }
    let rhs = DVector::from_fn(active.len(), |i, _| {
        let j = active[i];
        p.z.column(j).dot(&p.y) - p.lambda * cast::<T>(signs[j] as f64)
    });
    Ok(ginv.mul_vec(&rhs))
}

/// One stationarity violation found by [`kkt_check`]. `correlation` is the
/// residual correlation of the offending feature, `bound` what optimality
/// requires of it.
#[derive(Debug, Clone)]
pub struct KktViolation<T: Scalar> {
    pub index: usize,
    pub correlation: T,
    pub bound: T,
}

/// Check the lasso optimality conditions at `phi`: active features must have
/// residual correlation `lambda * sign(phi_j)` within `tol`, inactive ones
/// must stay within `lambda + tol` in magnitude. Empty result means pass.
pub fn kkt_check<T: Scalar>(
    p: &LassoProblem<T>,
    phi: &DVector<T>,
    tol: T,
) -> Vec<KktViolation<T>> {
    let resid = &p.y - &p.z * phi;
    let mut violations = Vec::new();
    for j in 0..p.m() {
        let c = p.z.column(j).dot(&resid);
        if phi[j] == T::zero() {
            if c.abs() > p.lambda + tol {
                violations.push(KktViolation { index: j, correlation: c, bound: p.lambda });
            }
        } else {
            let bound = p.lambda * phi[j].signum();
            if (c - bound).abs() > tol {
                violations.push(KktViolation { index: j, correlation: c, bound });
            }
        }
    }
    violations
}

/// Smallest penalty at which the solution is identically zero:
/// `||Z'y||_inf`.
pub fn lambda_max<T: Scalar>(z: &DMatrix<T>, y: &DVector<T>) -> T {
    let mut best = T::zero();
    for j in 0..z.ncols() {
        let c = z.column(j).dot(y).abs();
        if c > best {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve(p: &LassoProblem<f64>) -> LassoSolution<f64> {
        coordinate_descent(p, None, CdSettings::default()).unwrap()
    }

    /// Exhaustive sign-pattern oracle: solve the restricted quadratic for
    /// every pattern in {-1, 0, 1}^m, keep the sign-consistent candidate with
    /// the smallest objective. Independent of the solver under test.
    fn enumeration_oracle(p: &LassoProblem<f64>) -> (DVector<f64>, f64) {
        let m = p.m();
        let mut best_phi = DVector::zeros(m);
        let mut best_obj = p.objective(&best_phi);
        let patterns = 3usize.pow(m as u32);
        for code in 1..patterns {
            let mut c = code;
            let mut signs = vec![0i8; m];
            let mut active = Vec::new();
            for item in signs.iter_mut() {
                *item = match c % 3 {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                };
                c /= 3;
            }
            for (j, &s) in signs.iter().enumerate() {
                if s != 0 {
                    active.push(j);
                }
            }
            let d = active.len();
            let gram = DMatrix::from_fn(d, d, |i, j| {
                p.z().column(active[i]).dot(&p.z().column(active[j]))
            });
            let chol = match nalgebra::Cholesky::new(gram) {
                Some(c) => c,
                None => continue,
            };
            let rhs = DVector::from_fn(d, |i, _| {
                p.z().column(active[i]).dot(p.y()) - p.lambda() * signs[active[i]] as f64
            });
            let phi_a = chol.solve(&rhs);
            let consistent =
                (0..d).all(|i| phi_a[i] * signs[active[i]] as f64 > 0.0);
            if !consistent {
                continue;
            }
            let mut phi = DVector::zeros(m);
            for (i, &j) in active.iter().enumerate() {
                phi[j] = phi_a[i];
            }
            let obj = p.objective(&phi);
            if obj < best_obj {
                best_obj = obj;
                best_phi = phi;
            }
        }
        (best_phi, best_obj)
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LassoProblem<f64> {
        let z = DMatrix::from_fn(n, m, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let mut y = DVector::from_fn(n, |_, _| rng.random::<f64>() * 0.4 - 0.2);
        // Steer y toward a sparse combination so supports are nontrivial.
        for j in 0..m.min(3) {
            let coef = rng.random::<f64>() * 2.0 - 1.0;
            y += z.column(j) * coef;
        }
        let lmax = lambda_max(&z, &y);
        let frac = 0.1 + 0.6 * rng.random::<f64>();
        LassoProblem::new(z, y, frac * lmax).unwrap()
    }

    #[test]
    fn single_feature_soft_threshold() {
        // Z = [1; 1], y = [3, 1], lambda = 1: Z'y = 4, Z'Z = 2, phi = 3/2.
        let p = LassoProblem::new(dmatrix![1.0; 1.0], dvector![3.0, 1.0], 1.0).unwrap();
        let sol = solve(&p);
        assert_abs_diff_eq!(sol.phi[0], 1.5, epsilon = 1e-10);
        assert_eq!(sol.active, vec![0]);
        assert_eq!(sol.signs, vec![1]);
    }

    #[test]
    fn zero_solution_at_lambda_max() {
        let z = dmatrix![1.0; 1.0];
        let y = dvector![3.0, 1.0];
        assert_abs_diff_eq!(lambda_max(&z, &y), 4.0, epsilon = 1e-15);
        let p = LassoProblem::new(z, y, 4.0).unwrap();
        let sol = solve(&p);
        assert_eq!(sol.phi[0], 0.0);
        assert!(sol.active.is_empty());
        assert!(kkt_check(&p, &sol.phi, 1e-8).is_empty());
    }

    #[test]
    fn orthogonal_response_gives_zero_lambda_max() {
        let z = dmatrix![1.0; 1.0];
        let y = dvector![1.0, -1.0];
        assert_eq!(lambda_max(&z, &y), 0.0);
        let p = LassoProblem::new(z, y, 0.5).unwrap();
        let sol = solve(&p);
        assert!(sol.active.is_empty());
    }

    #[test]
    fn matches_enumeration_on_fixed_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = random_problem(&mut rng, 10, 6);
        let sol = solve(&p);
        let (oracle_phi, oracle_obj) = enumeration_oracle(&p);
        for j in 0..6 {
            assert_abs_diff_eq!(sol.phi[j], oracle_phi[j], epsilon = 1e-6);
        }
        assert!((p.objective(&sol.phi) - oracle_obj).abs() <= 1e-8 * oracle_obj.abs().max(1.0));
    }

    #[test]
    fn matches_enumeration_across_many_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..200 {
            let m = if trial % 40 == 0 {
                9 + (trial / 40) % 4 // a few large supports, up to 12
            } else {
                1 + rng.random_range(0..8)
            };
            let n = rng.random_range(m.max(4)..=60);
            let p = random_problem(&mut rng, n, m);
            let sol = solve(&p);
            let (_, oracle_obj) = enumeration_oracle(&p);
            let obj = p.objective(&sol.phi);
            assert!(
                (obj - oracle_obj).abs() <= 1e-8 * oracle_obj.abs().max(1.0),
                "trial {trial}: cd objective {obj} vs oracle {oracle_obj}"
            );
        }
    }

    #[test]
    fn objective_never_increases_across_sweeps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_problem(&mut rng, 20, 8);
        let mut prev = f64::INFINITY;
        for sweeps in 1..30 {
            let phi = match coordinate_descent(
                &p,
                None,
                CdSettings { tol: 0.0, max_sweeps: sweeps },
            ) {
                Ok(sol) => sol.phi,
                Err(LassoError::NoConvergence { solution, .. }) => solution.phi,
                Err(e) => panic!("{e}"),
            };
            let obj = p.objective(&phi);
            assert!(obj <= prev + 1e-12, "sweep {sweeps}: {obj} > {prev}");
            prev = obj;
        }
    }

    #[test]
    fn solution_is_scale_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_problem(&mut rng, 15, 5);
        let scaled = LassoProblem::new(p.z().clone(), p.y() * 2.0, p.lambda() * 2.0).unwrap();
        let tight = CdSettings { tol: 1e-13, max_sweeps: 200_000 };
        let a = coordinate_descent(&p, None, tight).unwrap();
        let b = coordinate_descent(&scaled, None, tight).unwrap();
        for j in 0..5 {
            assert_abs_diff_eq!(b.phi[j], 2.0 * a.phi[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn warm_start_converges_to_same_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = random_problem(&mut rng, 25, 7);
        let cold = solve(&p);
        let init = DVector::from_fn(7, |j, _| cold.phi[j] + 0.01 * ((j + 1) as f64));
        let warm = coordinate_descent(&p, Some(&init), CdSettings::default()).unwrap();
        for j in 0..7 {
            assert_abs_diff_eq!(warm.phi[j], cold.phi[j], epsilon = 1e-7);
        }
    }

    #[test]
    fn active_set_solution_matches_hand_values() {
        let p = LassoProblem::new(dmatrix![1.0; 1.0], dvector![3.0, 1.0], 1.0).unwrap();
        let gram = dmatrix![2.0];
        let ginv = GramInverse::from_gram(&gram).unwrap();
        let phi = active_set_solution(&p, &[0], &[1], &ginv).unwrap();
        assert_abs_diff_eq!(phi[0], 1.5, epsilon = 1e-12);
        let unpenalized = LassoProblem::new(dmatrix![1.0; 1.0], dvector![3.0, 1.0], 0.0).unwrap();
        let phi0 = active_set_solution(&unpenalized, &[0], &[1], &ginv).unwrap();
        assert_abs_diff_eq!(phi0[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn active_set_solution_checks_dimensions() {
        let p = LassoProblem::new(dmatrix![1.0; 1.0], dvector![3.0, 1.0], 1.0).unwrap();
        let ginv = GramInverse::<f64>::empty();
        assert!(matches!(
            active_set_solution(&p, &[0], &[1], &ginv),
            Err(LassoError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kkt_check_flags_corrupted_solution() {
        let p = LassoProblem::new(dmatrix![1.0; 1.0], dvector![3.0, 1.0], 1.0).unwrap();
        let good = solve(&p);
        assert!(kkt_check(&p, &good.phi, 1e-8).is_empty());
        let bad = dvector![2.0];
        let violations = kkt_check(&p, &bad, 1e-8);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].index, 0);
    }

    #[test]
    fn lambda_max_agrees_with_bisection_on_cd() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let z = DMatrix::from_fn(20, 10, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let y = DVector::from_fn(20, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let lmax = lambda_max(&z, &y);
        let is_zero = |lam: f64| {
            let p = LassoProblem::new(z.clone(), y.clone(), lam).unwrap();
            coordinate_descent(&p, None, CdSettings { tol: 1e-12, max_sweeps: 200_000 })
                .unwrap()
                .active
                .is_empty()
        };
        let (mut lo, mut hi) = (0.0, 2.0 * lmax);
        assert!(!is_zero(lo + 1e-12 * lmax));
        assert!(is_zero(hi));
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if is_zero(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((0.5 * (lo + hi) - lmax).abs() <= 1e-9 + 1e-12 * lmax);
    }

    #[test]
    fn rejects_malformed_problems() {
        assert!(matches!(
            LassoProblem::new(DMatrix::<f64>::zeros(0, 0), dvector![], 1.0),
            Err(LassoError::InvalidProblem { .. })
        ));
        assert!(matches!(
            LassoProblem::new(dmatrix![1.0], dvector![1.0, 2.0], 1.0),
            Err(LassoError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            LassoProblem::new(dmatrix![1.0], dvector![1.0], -1.0),
            Err(LassoError::InvalidProblem { .. })
        ));
        assert!(matches!(
            LassoProblem::new(dmatrix![f64::NAN], dvector![1.0], 1.0),
            Err(LassoError::InvalidProblem { .. })
        ));
    }

    #[test]
    fn covariance_form_matches_row_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = random_problem(&mut rng, 30, 9);
        let row = solve(&p);
        let gram = p.z().transpose() * p.z();
        let zty = p.z().transpose() * p.y();
        let cov =
            coordinate_descent_cov(&gram, &zty, p.lambda(), None, CdSettings::default()).unwrap();
        for j in 0..9 {
            assert_abs_diff_eq!(row.phi[j], cov.phi[j], epsilon = 1e-9);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn soft_threshold_shrinks_toward_zero(x in -10.0f64..10.0, lambda in 0.0f64..5.0) {
                let out = soft_threshold(x, lambda);
                prop_assert!(out.abs() <= x.abs());
                prop_assert!(out == 0.0 || out.signum() == x.signum());
                prop_assert!((x.abs() - out.abs() - lambda.min(x.abs())).abs() < 1e-12);
            }

            #[test]
            fn coordinate_descent_lands_on_a_kkt_point(
                entries in proptest::collection::vec(-2.0f64..2.0, 8 * 4),
                targets in proptest::collection::vec(-2.0f64..2.0, 8),
                lambda in 0.05f64..2.0,
            ) {
                let z = DMatrix::from_row_slice(8, 4, &entries);
                let y = DVector::from_vec(targets);
                let p = LassoProblem::new(z, y, lambda).unwrap();
                let sol = coordinate_descent(&p, None, CdSettings::default()).unwrap();
                let violations = kkt_check(&p, &sol.phi, 1e-6);
                prop_assert!(violations.is_empty(), "violations: {violations:?}");
            }
        }
    }
}
