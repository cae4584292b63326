//! Monotonicity analysis of H -> V(H, k, t).
//!
//! V is strictly convex in H for fixed t > 0 (the second derivative is a sum
//! of manifestly positive terms), so the minimizing Hurst index is unique and
//! characterized by the sign pattern of dV/dH at the interval ends. Two time
//! thresholds organize the k = 1 picture: tau_1, where dV/dH(1, t) changes
//! sign, and tau_1/2, where dV/dH(1/2, t) does; between log 3 and tau_1/2 the
//! minimizer sits in (1/2, 1), past tau_1/2 it drops below 1/2.

use crate::error::{Error, Result};
use crate::fbm::validate_rate;
use crate::process::{dvariance_dh, variance, EvalPoint};

/// ln 3, the crossing time of V(1/2, t) and V(1, t) at k = 1.
pub const LN_3: f64 = 1.0986122886681098;

/// ln(2 + sqrt 3), the crossing time of V(0, t) and V(1, t) at k = 1.
pub const LN_2_PLUS_SQRT_3: f64 = 1.3169578969248166;

/// Where the (unique) minimizer of H -> V(H, k, t) sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// dV/dH <= 0 on all of [0, 1]; the minimum is the boundary H = 1.
    DecreasingEverywhere,
    /// Interior stationary point in (1/2, 1).
    InteriorMinHighH,
    /// Interior stationary point in (0, 1/2).
    InteriorMinLowH,
    /// dV/dH(1/2, t) = 0: V increases on [1/2, 1] and the minimum is H = 1/2.
    IncreasingOnHalfOne,
}

/// Minimizing Hurst index of H -> V(H, k, t) at fixed t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimumResult {
    pub time: f64,
    pub h_star: f64,
    pub v_min: f64,
    /// |dV/dH| at h_star for interior regimes, 0 sentinel at boundary ones.
    pub derivative_residual: f64,
    pub regime: Regime,
}

/// Sign-change thresholds of the boundary derivatives, with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    /// Root of t -> dV/dH(1, t, k).
    pub tau1: f64,
    /// Root of t -> dV/dH(1/2, t, k).
    pub tau_half: f64,
    pub log3: f64,
    pub log_2_plus_sqrt3: f64,
    pub rate_k: f64,
    pub residual_tau1: f64,
    pub residual_tau_half: f64,
    pub bracket_tau1: (f64, f64),
    pub bracket_tau_half: (f64, f64),
}

const BRENT_MAX_ITER: usize = 100;

/// Brent's method: root of f on [lo, hi] given a sign change.
///
/// Combines inverse quadratic interpolation, secant steps and bisection;
/// converges for any continuous f with f(lo) f(hi) <= 0. The evaluation
/// callback is fallible so that quadrature-backed functions propagate their
/// own failures.
pub fn brent_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!(
            "invalid bracket [{lo:e}, {hi:e}]"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Domain(format!("tolerance {tol:e} must be positive")));
    }

    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..BRENT_MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // attempt inverse quadratic interpolation (secant when a == c)
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 {
            d
        } else {
            tol1.copysign(xm)
        };
        fb = f(b)?;
    }

    Err(Error::MaxIterations { best: b })
}

/// dV/dH at fixed H as a function of t, for bracketing in time.
fn boundary_derivative(h: f64, k: f64) -> impl Fn(f64) -> Result<f64> {
    move |t: f64| dvariance_dh(&EvalPoint::new(h, t, k)?)
}

// Scan fallback when the canonical k = 1 bracket does not straddle the root.
const SCAN_STEP: f64 = 0.25;
const SCAN_LIMIT: f64 = 10.0;

fn locate_bracket(
    f: &impl Fn(f64) -> Result<f64>,
    first_lo: f64,
    first_hi: f64,
) -> Result<(f64, f64)> {
    let f_lo = f(first_lo)?;
    let f_hi = f(first_hi)?;
    if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() != f_hi.signum() {
        return Ok((first_lo, first_hi));
    }
    let mut prev_t = SCAN_STEP;
    let mut prev_f = f(prev_t)?;
    let mut t = prev_t + SCAN_STEP;
    while t <= SCAN_LIMIT + 0.5 * SCAN_STEP {
        let ft = f(t)?;
        if prev_f == 0.0 || ft == 0.0 || prev_f.signum() != ft.signum() {
            return Ok((prev_t, t));
        }
        prev_t = t;
        prev_f = ft;
        t += SCAN_STEP;
    }
    Err(Error::NoSignChange {
        lo: SCAN_STEP,
        hi: SCAN_LIMIT,
        f_lo: f(SCAN_STEP)?,
        f_hi: prev_f,
    })
}

/// Time where dV/dH(1, t, k) changes sign (approximately 1.05368 at k = 1).
///
/// The canonical bracket [1, log 3] is tried first; if the sign change is
/// elsewhere, a 0.25-step scan over (0, 10] locates one.
pub fn find_tau1(k: f64, tol: f64) -> Result<f64> {
    validate_rate(k)?;
    let f = boundary_derivative(1.0, k);
    let (lo, hi) = locate_bracket(&f, 1.0, LN_3)?;
    brent_root(&f, lo, hi, tol)
}

/// Time where dV/dH(1/2, t, k) changes sign (approximately 1.19142 at k = 1).
///
/// The canonical bracket [log 3, 2] is tried first, with the same scan
/// fallback as [`find_tau1`].
pub fn find_tau_half(k: f64, tol: f64) -> Result<f64> {
    validate_rate(k)?;
    let f = boundary_derivative(0.5, k);
    let (lo, hi) = locate_bracket(&f, LN_3, 2.0)?;
    brent_root(&f, lo, hi, tol)
}

/// Both thresholds with residuals, brackets and reference constants.
pub fn threshold_report(k: f64, tol: f64) -> Result<ThresholdReport> {
    validate_rate(k)?;
    let f1 = boundary_derivative(1.0, k);
    let fh = boundary_derivative(0.5, k);
    let bracket_tau1 = locate_bracket(&f1, 1.0, LN_3)?;
    let tau1 = brent_root(&f1, bracket_tau1.0, bracket_tau1.1, tol)?;
    let bracket_tau_half = locate_bracket(&fh, LN_3, 2.0)?;
    let tau_half = brent_root(&fh, bracket_tau_half.0, bracket_tau_half.1, tol)?;
    Ok(ThresholdReport {
        tau1,
        tau_half,
        log3: LN_3,
        log_2_plus_sqrt3: LN_2_PLUS_SQRT_3,
        rate_k: k,
        residual_tau1: f1(tau1)?,
        residual_tau_half: fh(tau_half)?,
        bracket_tau1,
        bracket_tau_half,
    })
}

/// Unique minimizer of H -> V(H, k, t) at fixed t > 0.
///
/// Classification by the boundary derivatives, using convexity:
/// dV/dH(1) <= 0 puts the minimum at H = 1; otherwise a negative
/// dV/dH(1/2) places the stationary point in (1/2, 1), a positive one in
/// (0, 1/2), and an exact zero makes H = 1/2 itself the minimum.
pub fn find_min_h(t: f64, k: f64, tol: f64) -> Result<MinimumResult> {
    validate_rate(k)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "minimization needs t > 0 finite, got {t}"
        )));
    }

    let deriv = |h: f64| dvariance_dh(&EvalPoint::new(h, t, k)?);

    let d_at_1 = deriv(1.0)?;
    if d_at_1 <= 0.0 {
        let v = variance(&EvalPoint::new(1.0, t, k)?)?;
        return Ok(MinimumResult {
            time: t,
            h_star: 1.0,
            v_min: v.value,
            derivative_residual: 0.0,
            regime: Regime::DecreasingEverywhere,
        });
    }

    let d_at_half = deriv(0.5)?;
    let (regime, h_star) = if d_at_half < 0.0 {
        (Regime::InteriorMinHighH, brent_root(deriv, 0.5, 1.0, tol)?)
    } else if d_at_half == 0.0 {
        (Regime::IncreasingOnHalfOne, 0.5)
    } else {
        (Regime::InteriorMinLowH, brent_root(deriv, 0.0, 0.5, tol)?)
    };

    let v = variance(&EvalPoint::new(h_star, t, k)?)?;
    let derivative_residual = match regime {
        Regime::IncreasingOnHalfOne => 0.0,
        _ => deriv(h_star)?.abs(),
    };
    Ok(MinimumResult {
        time: t,
        h_star,
        v_min: v.value,
        derivative_residual,
        regime,
    })
}

/// Crossing of V(1/2, k, t) and V(1, k, t): exists iff 0 < |k| < 2, at
/// t = log((k+2)/(2-k)) / k where both variances equal 4 / (2-k)^2.
pub fn crossing_time_half_one(k: f64) -> Result<(f64, f64)> {
    validate_rate(k)?;
    if k.abs() >= 2.0 {
        return Err(Error::Domain(format!(
            "V(1/2) and V(1) do not cross for |k| >= 2 (got k = {k})"
        )));
    }
    let t = ((k + 2.0) / (2.0 - k)).ln() / k;
    let v = 4.0 / ((2.0 - k) * (2.0 - k));
    Ok((t, v))
}

/// Crossing of V(0, k, t) and V(1/2, k, t): exists iff 0 < |k| < 1, at
/// t = log((1+k)/(1-k)) / (2k) where both variances equal 1 / (1-k).
pub fn crossing_time_zero_half(k: f64) -> Result<(f64, f64)> {
    validate_rate(k)?;
    if k.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "V(0) and V(1/2) do not cross for |k| >= 1 (got k = {k})"
        )));
    }
    let t = ((1.0 + k) / (1.0 - k)).ln() / (2.0 * k);
    let v = 1.0 / (1.0 - k);
    Ok((t, v))
}

/// Crossing of V(0, t) and V(1, t) at k = 1: returns the analytic time
/// log(2 + sqrt 3) together with an independent numeric root of the
/// difference, requiring agreement within tol.
pub fn crossing_time_zero_one(tol: f64) -> Result<(f64, f64)> {
    let diff = |t: f64| -> Result<f64> {
        let v0 = 0.5 * ((2.0 * t).exp() + 1.0);
        let e = t.exp_m1();
        Ok(v0 - e * e)
    };
    let numeric = brent_root(diff, 1.0, 1.6, tol)?;
    let analytic = LN_2_PLUS_SQRT_3;
    if (numeric - analytic).abs() > tol.max(1e-12) {
        return Err(Error::CrossCheck {
            a: analytic,
            b: numeric,
            tol,
        });
    }
    Ok((analytic, numeric))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_linear_and_quadratic() {
        let r = brent_root(|x| Ok(x - 2.0), 0.0, 5.0, 1e-12).unwrap();
        assert!((r - 2.0).abs() <= 1e-10);
        let r = brent_root(|x| Ok(x * x - 3.0), 0.0, 2.0, 1e-13).unwrap();
        assert!((r - 3.0_f64.sqrt()).abs() <= 1e-11);
    }

    #[test]
    fn brent_exponential_crossing() {
        // e^(2x) - 4 e^x + 3 = 0 at x = 0 and x = log 3
        let f = |x: f64| Ok((2.0 * x).exp() - 4.0 * x.exp() + 3.0);
        let r = brent_root(f, 0.5, 2.0, 1e-13).unwrap();
        assert!((r - LN_3).abs() <= 1e-11, "got {r}");
    }

    #[test]
    fn brent_rejects_bad_brackets() {
        assert!(matches!(
            brent_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-10),
            Err(Error::NoSignChange { .. })
        ));
        assert!(brent_root(Ok, 2.0, 1.0, 1e-10).is_err());
        assert!(brent_root(Ok, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn brent_accepts_root_at_endpoint() {
        let r = brent_root(|x| Ok(x - 1.0), 1.0, 2.0, 1e-12).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn thresholds_at_unit_rate() {
        let tau1 = find_tau1(1.0, 1e-10).unwrap();
        let tau_half = find_tau_half(1.0, 1e-10).unwrap();
        assert!((tau1 - 1.05368).abs() <= 5e-4, "tau1 = {tau1}");
        assert!((tau_half - 1.19142).abs() <= 5e-4, "tau_half = {tau_half}");
        assert!(1.0 < tau1 && tau1 < LN_3 && LN_3 < tau_half);
    }

    #[test]
    fn threshold_report_diagnostics() {
        let r = threshold_report(1.0, 1e-10).unwrap();
        assert!(r.residual_tau1.abs() <= 1e-6);
        assert!(r.residual_tau_half.abs() <= 1e-6);
        assert_eq!(r.bracket_tau1, (1.0, LN_3));
        assert_eq!(r.bracket_tau_half, (LN_3, 2.0));
        assert_eq!(r.rate_k, 1.0);
    }

    #[test]
    fn minimizer_regimes_at_unit_rate() {
        // before tau_1 the variance is decreasing in H on all of [0, 1]
        let early = find_min_h(0.9, 1.0, 1e-10).unwrap();
        assert_eq!(early.regime, Regime::DecreasingEverywhere);
        assert_eq!(early.h_star, 1.0);
        assert_eq!(early.derivative_residual, 0.0);
        // between tau_1 and tau_1/2 the minimizer is interior above 1/2
        let mid = find_min_h(1.15, 1.0, 1e-10).unwrap();
        assert_eq!(mid.regime, Regime::InteriorMinHighH);
        assert!(mid.h_star > 0.5 && mid.h_star < 1.0);
        assert!(mid.derivative_residual <= 1e-6);
        // past tau_1/2 it drops below 1/2
        let late = find_min_h(1.5, 1.0, 1e-10).unwrap();
        assert_eq!(late.regime, Regime::InteriorMinLowH);
        assert!(late.h_star > 0.0 && late.h_star < 0.5);
        // v_min never exceeds the boundary variances
        let v0 = variance(&EvalPoint::unit_rate(0.0, 1.5).unwrap()).unwrap();
        let v1 = variance(&EvalPoint::unit_rate(1.0, 1.5).unwrap()).unwrap();
        assert!(late.v_min <= v0.value.min(v1.value));
    }

    #[test]
    fn minimizer_rejects_zero_time() {
        assert!(find_min_h(0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn crossing_closed_forms() {
        // k = 1: t = log 3, common variance 4
        let (t, v) = crossing_time_half_one(1.0).unwrap();
        assert!((t - LN_3).abs() <= 1e-14);
        assert!((v - 4.0).abs() <= 1e-14);
        // k = -1: t = log 3 again, common variance 4/9
        let (t, v) = crossing_time_half_one(-1.0).unwrap();
        assert!((t - LN_3).abs() <= 1e-14);
        assert!((v - 4.0 / 9.0).abs() <= 1e-14);
        // k = 1/2 and -1/2 for the lower crossing: t = log 3 / 1, var 2 and 2/3
        let (t, v) = crossing_time_zero_half(0.5).unwrap();
        assert!((t - LN_3).abs() <= 1e-14, "t = {t}");
        assert!((v - 2.0).abs() <= 1e-14);
        let (t, v) = crossing_time_zero_half(-0.5).unwrap();
        assert!((t - LN_3).abs() <= 1e-14);
        assert!((v - 2.0 / 3.0).abs() <= 1e-14);
        // k = 0.1: slow divergence, crossing just past 1
        let (t, _) = crossing_time_half_one(0.1).unwrap();
        assert!((t - 1.0008345855698252).abs() <= 1e-12);
    }

    #[test]
    fn crossing_domain_limits() {
        assert!(crossing_time_half_one(2.0).is_err());
        assert!(crossing_time_half_one(-2.5).is_err());
        assert!(crossing_time_zero_half(1.0).is_err());
        assert!(crossing_time_zero_half(-1.3).is_err());
        // 1 <= |k| < 2 is fine for the upper crossing
        assert!(crossing_time_half_one(1.5).is_ok());
        assert!(crossing_time_half_one(-1.5).is_ok());
    }

    #[test]
    fn zero_one_crossing_cross_check() {
        let (analytic, numeric) = crossing_time_zero_one(1e-12).unwrap();
        assert_eq!(analytic, LN_2_PLUS_SQRT_3);
        assert!((numeric - analytic).abs() <= 1e-12);
    }
}
