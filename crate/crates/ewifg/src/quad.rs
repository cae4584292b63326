//! One-dimensional quadrature.
//!
//! Three integrators cover the needs of the covariance evaluators:
//!
//! * [`integrate_adaptive`]: globally adaptive bisection driven by a
//!   Gauss-Kronrod 15(7) pair, for smooth integrands on finite intervals.
//! * [`integrate_endpoint_singular`]: tanh-sinh (double-exponential) rule for
//!   integrands with an integrable singularity at either endpoint, such as
//!   z^(2H) log z near z = 0. Nodes are placed with their distance from the
//!   nearer endpoint computed directly, so the integrand is never evaluated
//!   at the endpoints themselves and retains full precision next to them.
//! * [`integrate_semiinfinite`]: exp-sinh rule on [a, inf) for integrands
//!   with exponential decay, optionally singular at a.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerance and budget knobs shared by all integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Relative tolerance on the whole-interval estimate. Floor 1e-14.
    pub rel_tol: f64,
    /// Absolute tolerance; the effective target is max(abs_tol, rel_tol * |I|).
    pub abs_tol: f64,
    /// Segment budget for the adaptive rule, level budget scale for the
    /// double-exponential rules.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 1e-14) || !self.abs_tol.is_finite() || self.abs_tol < 0.0 {
            return Err(Error::Domain(format!(
                "quadrature tolerances out of range: rel_tol {:e} (floor 1e-14), abs_tol {:e}",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Converged estimate of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Estimated absolute error, >= 0 and consistent with the tolerances met.
    pub abs_err: f64,
    /// Segments used by the adaptive rule, refinement levels used by the
    /// double-exponential rules. Always >= 1.
    pub subdivisions: usize,
}

// 15-point Kronrod abscissae (positive half, descending) and weights, with the
// embedded 7-point Gauss weights. Even-indexed abscissae extend the Gauss set,
// odd-indexed ones are the Gauss points themselves. Kept at the published
// 33-digit precision; the compiler rounds to the nearest f64.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Scale a raw |K - G| difference into an error estimate that is safe against
/// both smooth integrands (superconvergence) and roundoff-dominated ones.
fn rescale_error(err: f64, result_abs: f64, result_asc: f64) -> f64 {
    let mut err = err.abs();
    if result_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / result_asc).powf(1.5);
        err = if scale < 1.0 { result_asc * scale } else { result_asc };
    }
    if result_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * result_abs);
    }
    err
}

/// One Gauss-Kronrod 15(7) evaluation on [a, b].
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEvaluation { x })
        }
    };

    let fc = eval(center)?;
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let fsum = f1 + f2;
        resk += WGK[j] * fsum;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * fsum;
        }
    }

    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }

    let value = resk * half;
    let err = rescale_error((resk - resg) * half, resabs * half.abs(), resasc * half.abs());
    Ok((value, err))
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod 15(7) integration of f over [a, b].
///
/// The interval with the largest error estimate is bisected until the summed
/// error meets max(abs_tol, rel_tol * |I|) or the segment budget is spent.
/// a == b yields zero. Exact (to rescaled roundoff) for polynomials through
/// degree 22 on a single segment.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    if !a.is_finite() || !b.is_finite() || a > b {
        return Err(Error::Domain(format!(
            "invalid interval [{a:e}, {b:e}]: endpoints must be finite with a <= b"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            subdivisions: 1,
        });
    }

    let (value, err) = gk15(&f, a, b)?;
    let mut total_value = value;
    let mut total_err = err;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });

    while total_err > cfg.target(total_value) {
        if heap.len() >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                value: resum(&heap),
                abs_err: total_err,
                subdivisions: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval narrower than one ulp; its error cannot be reduced
            return Err(Error::NonConvergence {
                value: worst.value + resum(&heap),
                abs_err: total_err,
                subdivisions: heap.len() + 1,
            });
        }
        let (lv, le) = gk15(&f, worst.a, mid)?;
        let (rv, re) = gk15(&f, mid, worst.b)?;
        total_value += lv + rv - worst.value;
        total_err += le + re - worst.err;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            err: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            err: re,
        });
    }

    Ok(QuadResult {
        value: resum(&heap),
        abs_err: total_err.max(0.0),
        subdivisions: heap.len(),
    })
}

/// Re-sum segment contributions to shed the drift of incremental updates.
fn resum(heap: &BinaryHeap<Segment>) -> f64 {
    heap.iter().map(|s| s.value).sum()
}

const DE_T_MAX: f64 = 4.5;
const DE_MAX_LEVEL: usize = 11;
const DE_MIN_LEVEL: usize = 2;

/// Tanh-sinh integration of f over (a, b).
///
/// Suited to integrands with an integrable singularity at a or b. Refinement
/// halves the mesh and reuses previous nodes; convergence is declared when
/// consecutive levels agree within the tolerance. The integrand is evaluated
/// strictly inside (a, b); nodes whose floating-point position would collide
/// with an endpoint are dropped (their weights are far below any tolerance).
pub fn integrate_endpoint_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::Domain(format!(
            "invalid interval [{a:e}, {b:e}]: endpoints must be finite with a < b"
        )));
    }

    let r = 0.5 * (b - a);
    // g(t) summed over the node set; the integral estimate is h * r * gsum
    let term = |t: f64| -> Result<f64> {
        let w = std::f64::consts::FRAC_PI_2 * t.sinh();
        let weight = std::f64::consts::FRAC_PI_2 * t.cosh() / w.cosh().powi(2);
        // distance from the nearer endpoint: 1 -+ tanh(w) = 2 / (1 + e^(+-2w))
        let x = if t >= 0.0 {
            b - 2.0 * r / (1.0 + (2.0 * w).exp())
        } else {
            a + 2.0 * r / (1.0 + (-2.0 * w).exp())
        };
        if x <= a || x >= b {
            return Ok(0.0);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFiniteEvaluation { x });
        }
        Ok(weight * fx)
    };

    let mut gsum = term(0.0)?;
    let mut n_max = DE_T_MAX as i64; // h = 1 at level 0
    for j in 1..=n_max {
        gsum += term(j as f64)? + term(-(j as f64))?;
    }
    let mut prev = r * gsum; // h = 1
    let mut last_gap = f64::INFINITY;

    for level in 1..=DE_MAX_LEVEL {
        let h = 0.5_f64.powi(level as i32);
        n_max = (DE_T_MAX / h).ceil() as i64;
        // new nodes are the odd multiples of h
        let mut j = 1;
        while j <= n_max {
            let t = j as f64 * h;
            gsum += term(t)? + term(-t)?;
            j += 2;
        }
        let value = h * r * gsum;
        let err = (value - prev).abs();
        if level >= DE_MIN_LEVEL && err <= cfg.target(value) {
            return Ok(QuadResult {
                value,
                abs_err: err.max(f64::EPSILON * value.abs()),
                subdivisions: level,
            });
        }
        prev = value;
        last_gap = err;
    }

    Err(Error::NonConvergence {
        value: prev,
        abs_err: last_gap,
        subdivisions: DE_MAX_LEVEL,
    })
}

/// Exp-sinh integration of f over [a, inf).
///
/// Requires f to decay at least exponentially; an integrable singularity at a
/// is allowed. Node positions x = a + e^w approach a from above with w -> -inf
/// and infinity with w -> +inf; terms below abs_tol / 100 truncate the sweep
/// on each side once the sum has stabilized there.
pub fn integrate_semiinfinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    if !a.is_finite() {
        return Err(Error::Domain(format!("lower endpoint {a:e} must be finite")));
    }

    let term = |t: f64| -> Result<f64> {
        let w = std::f64::consts::FRAC_PI_2 * t.sinh();
        if w > 700.0 {
            // e^w overflows; f decays, the true contribution is below any tolerance
            return Ok(0.0);
        }
        let ew = w.exp();
        let x = a + ew;
        if x <= a {
            return Ok(0.0);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFiniteEvaluation { x });
        }
        Ok(ew * std::f64::consts::FRAC_PI_2 * t.cosh() * fx)
    };

    let cutoff = (cfg.abs_tol / 100.0).max(f64::MIN_POSITIVE);
    let mut prev = f64::NAN;
    let mut last_gap = f64::INFINITY;
    for level in 0..=DE_MAX_LEVEL {
        let h = 0.5_f64.powi(level as i32);
        let n_max = (DE_T_MAX / h).ceil() as i64;
        let mut sum = term(0.0)?;
        for dir in [1.0_f64, -1.0] {
            let mut below = 0;
            for j in 1..=n_max {
                let g = term(dir * j as f64 * h)?;
                sum += g;
                below = if g.abs() < cutoff { below + 1 } else { 0 };
                if below >= 2 {
                    break;
                }
            }
        }
        let value = h * sum;
        if level >= DE_MIN_LEVEL {
            let err = (value - prev).abs();
            if err <= cfg.target(value) {
                return Ok(QuadResult {
                    value,
                    abs_err: err.max(f64::EPSILON * value.abs()),
                    subdivisions: level,
                });
            }
            last_gap = err;
        }
        prev = value;
    }

    Err(Error::NonConvergence {
        value: prev,
        abs_err: last_gap,
        subdivisions: DE_MAX_LEVEL,
    })
}
