//! Second-order theory and simulation of the exponentially weighted
//! fractional Brownian integral
//!
//! ```text
//! X_t = int_0^t e^(k s) dB^H_s,   H in [0, 1], t >= 0, k != 0,
//! ```
//!
//! where B^H is fractional Brownian motion extended to the endpoint laws
//! H = 0 and H = 1. The crate computes the variance V(H, k, t), the two-time
//! covariance, the differential entropy of the Gaussian marginal, the partial
//! derivatives of V in H and t, the long-horizon limit
//! e^(-2kt) V -> Gamma(2H + 1) / 2, and the minimizing Hurst index of
//! H -> V(H, k, t) with its regime thresholds. A Cholesky-based Monte Carlo
//! sampler provides an independent check of every analytic formula.
//!
//! Module map:
//!
//! * [`quad`]: adaptive Gauss-Kronrod and double-exponential quadrature.
//! * [`special`]: gamma function, Euler's constant.
//! * [`fbm`]: fractional Brownian covariance with its boundary laws.
//! * [`process`]: variance, covariance, entropy and derivative evaluators.
//! * [`analysis`]: root finding, monotonicity thresholds, minimizers,
//!   variance-crossing times.
//! * [`mc`]: exact path sampling and Monte Carlo variance estimates.

// Validation guards are written as !(x > 0.0) rather than x <= 0.0 on
// purpose: the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod error;
pub mod fbm;
pub mod mc;
pub mod process;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use process::EvalPoint;
