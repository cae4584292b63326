use thiserror::Error;

/// Crate-wide error type.
///
/// Numerical routines carry their best estimate where one exists, so a caller
/// can distinguish "the answer is unreliable" from "there is no answer".
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameter combination the evaluators deliberately do not model.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Quadrature stopped at its subdivision or level budget before reaching
    /// the requested tolerance. Carries the best estimate obtained.
    #[error("quadrature did not converge: value {value:e}, abs_err {abs_err:e} after {subdivisions} subdivisions")]
    NonConvergence {
        value: f64,
        abs_err: f64,
        subdivisions: usize,
    },

    /// The integrand returned NaN or an infinity at an interior node.
    #[error("integrand returned a non-finite value at x = {x:e}")]
    NonFiniteEvaluation { x: f64 },

    /// Root bracket endpoints do not straddle a sign change.
    #[error("no sign change on [{lo:e}, {hi:e}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// Root iteration cap reached before the bracket shrank to tolerance.
    #[error("root search hit the iteration cap; best estimate {best:e}")]
    MaxIterations { best: f64 },

    /// A sampled path and its time grid have different lengths.
    #[error("path has {path_len} samples but grid has {grid_len} times")]
    GridMismatch { path_len: usize, grid_len: usize },

    /// The Gram matrix was not numerically positive definite, even after one
    /// round of diagonal jitter.
    #[error("Cholesky factorization failed at pivot {pivot}")]
    CholeskyFailed { pivot: usize },

    /// Two routes that must agree disagreed by more than the tolerance.
    #[error("cross-check failed: {a:e} vs {b:e} differ by more than {tol:e}")]
    CrossCheck { a: f64, b: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
