//! Rank-one maintenance of an inverse Gram matrix.
//!
//! The homotopy engine keeps `(Z_A' Z_A)^-1` for the current active feature
//! set `A` up to date across three kinds of edit, each O(d^2) instead of the
//! O(d^3) of refactorizing:
//!
//! * a new observation row folded in with some weight (Sherman-Morrison;
//!   the weight may be negative, or a fractional increment while walking the
//!   insertion homotopy),
//! * a feature joining `A` (bordered inverse via the Schur complement),
//! * a feature leaving `A` (block deletion).
//!
//! Every denominator is guarded; callers refactorize from the explicit Gram
//! matrix when an update reports degeneracy, and periodically anyway (see
//! [`REFRESH_INTERVAL`]) to keep accumulated roundoff bounded.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scalar::{cast, to_f64, Scalar};

/// Absolute guard on rank-one denominators, Schur complements, and deletion
/// pivots. Values at or under the guard are treated as singular.
pub const GUARD_TOL: f64 = 1e-12;

/// Rank-one updates tolerated before a caller should rebuild the inverse
/// from the explicit Gram matrix.
pub const REFRESH_INTERVAL: usize = 500;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    /// A Sherman-Morrison denominator or a deletion pivot hit the guard.
    #[error("rank-one denominator {denominator:.3e} is within {guard:.1e} of singular")]
    SingularUpdate { denominator: f64, guard: f64 },
    /// The candidate feature is numerically dependent on the active set.
    #[error("feature addition pivot {pivot:.3e} is within {guard:.1e} of singular")]
    DegenerateFeature { pivot: f64, guard: f64 },
    /// Direct factorization of a Gram submatrix failed.
    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Explicit inverse of a symmetric positive definite Gram matrix, with
/// rank-one edits and an update counter for refresh policies.
#[derive(Debug, Clone)]
pub struct GramInverse<T: Scalar> {
    inv: DMatrix<T>,
    updates: usize,
}

impl<T: Scalar> GramInverse<T> {
    /// Inverse of the empty (0 x 0) Gram matrix.
    pub fn empty() -> Self {
        Self { inv: DMatrix::zeros(0, 0), updates: 0 }
    }

    /// Invert an explicit Gram matrix directly (Cholesky).
    pub fn from_gram(gram: &DMatrix<T>) -> Result<Self, LinalgError> {
        assert_eq!(gram.nrows(), gram.ncols(), "gram matrix must be square");
        if gram.nrows() == 0 {
            return Ok(Self::empty());
        }
        let chol = nalgebra::Cholesky::new(gram.clone())
            .ok_or(LinalgError::NotPositiveDefinite)?;
        let mut inv = chol.inverse();
        symmetrize(&mut inv);
        Ok(Self { inv, updates: 0 })
    }

    pub fn dim(&self) -> usize {
        self.inv.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.inv
    }

    /// Rank-one updates applied since construction or the last refresh.
    pub fn updates_since_refresh(&self) -> usize {
        self.updates
    }

    /// Rebuild from an explicit Gram matrix, resetting the update counter.
    pub fn refresh_from(&mut self, gram: &DMatrix<T>) -> Result<(), LinalgError> {
        *self = Self::from_gram(gram)?;
        Ok(())
    }

    /// `inverse * v`.
    pub fn mul_vec(&self, v: &DVector<T>) -> DVector<T> {
        &self.inv * v
    }

    /// `a' * inverse * b`.
    pub fn bilinear(&self, a: &DVector<T>, b: &DVector<T>) -> T {
        a.dot(&self.mul_vec(b))
    }

    /// Fold an observation row `z` (restricted to the active set) into the
    /// inverse with the given weight: the tracked Gram becomes
    /// `G + weight * z z'`. Negative weights remove; fractional weights are
    /// the gamma^2 increments of the insertion homotopy.
    pub fn observation_update(&mut self, z: &DVector<T>, weight: T) -> Result<(), LinalgError> {
        assert_eq!(z.len(), self.dim(), "observation row length must match dimension");
        if self.dim() == 0 || weight == T::zero() {
            return Ok(());
        }
        let u = self.mul_vec(z);
        let denom = T::one() + weight * z.dot(&u);
        if to_f64(denom).abs() <= GUARD_TOL {
            return Err(LinalgError::SingularUpdate {
                denominator: to_f64(denom),
                guard: GUARD_TOL,
            });
        }
        let scale = weight / denom;
        self.inv.ger(-scale, &u, &u, T::one());
        symmetrize(&mut self.inv);
        self.updates += 1;
        Ok(())
    }

    /// Grow the inverse by one feature appended at the end. `cross` holds the
    /// inner products of the new feature's column with the active columns,
    /// `self_inner` its squared norm (both on the same data the tracked Gram
    /// reflects).
    pub fn add_feature(&mut self, cross: &DVector<T>, self_inner: T) -> Result<(), LinalgError> {
        let d = self.dim();
        assert_eq!(cross.len(), d, "cross-product length must match dimension");
        let (schur, u) = if d == 0 {
            (self_inner, DVector::zeros(0))
        } else {
            let u = self.mul_vec(cross);
            (self_inner - cross.dot(&u), u)
        };
        if to_f64(schur) <= GUARD_TOL {
            return Err(LinalgError::DegenerateFeature { pivot: to_f64(schur), guard: GUARD_TOL });
        }
        let inv_s = T::one() / schur;
        let mut grown = DMatrix::zeros(d + 1, d + 1);
        for i in 0..d {
            for j in 0..d {
                grown[(i, j)] = self.inv[(i, j)] + u[i] * u[j] * inv_s;
            }
            grown[(i, d)] = -u[i] * inv_s;
            grown[(d, i)] = -u[i] * inv_s;
        }
        grown[(d, d)] = inv_s;
        self.inv = grown;
        symmetrize(&mut self.inv);
        self.updates += 1;
        Ok(())
    }

    /// Shrink the inverse by deleting the feature at position `idx`,
    /// preserving the order of the remaining features.
    pub fn remove_feature(&mut self, idx: usize) -> Result<(), LinalgError> {
        let d = self.dim();
        assert!(idx < d, "feature index out of range");
        let pivot = self.inv[(idx, idx)];
        if to_f64(pivot) <= GUARD_TOL {
            return Err(LinalgError::SingularUpdate { denominator: to_f64(pivot), guard: GUARD_TOL });
        }
        let mut reduced = DMatrix::zeros(d - 1, d - 1);
        let keep: Vec<usize> = (0..d).filter(|&i| i != idx).collect();
        for (ri, &i) in keep.iter().enumerate() {
            for (rj, &j) in keep.iter().enumerate() {
                reduced[(ri, rj)] =
                    self.inv[(i, j)] - self.inv[(i, idx)] * self.inv[(idx, j)] / pivot;
            }
        }
        self.inv = reduced;
        symmetrize(&mut self.inv);
        self.updates += 1;
        Ok(())
    }
}

/// Average away roundoff asymmetry after an update.
fn symmetrize<T: Scalar>(m: &mut DMatrix<T>) {
    let half = cast::<T>(0.5);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let avg = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}
