//! Online l1-penalized AR-X forecasting.
//!
//! The crate fits lasso autoregressions with exogenous inputs and keeps them
//! current as observations stream in, using an exact homotopy update instead
//! of refitting: first the penalty is moved along its regularization path,
//! then the new observation is folded in by tracking the solution of a
//! continuously reweighted problem. On top of the solver sit two online
//! rules (gradient and Newton steps on the one-step prediction error) that
//! adapt the penalty itself, plus the rolling-validation and
//! information-criterion baselines they are measured against.
//!
//! The numerical core is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the `*64` aliases at the crate root pick the default precision.

pub mod arx;
pub mod datagen;
pub mod homotopy;
pub mod tuning;
pub mod lasso;
pub mod linalg;
pub mod scalar;

pub use scalar::Scalar;

/// Default-precision alias for [`linalg::GramInverse`].
pub type GramInverse64 = linalg::GramInverse<f64>;
/// Default-precision alias for [`lasso::LassoProblem`].
pub type LassoProblem64 = lasso::LassoProblem<f64>;
