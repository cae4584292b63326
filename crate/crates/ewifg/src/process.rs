//! Second-order theory of the exponentially weighted fractional integral
//!
//! ```text
//! X_t = int_0^t e^(k s) dB^H_s,   H in [0, 1], t >= 0, k != 0.
//! ```
//!
//! The process is centered Gaussian, so variance, covariance and entropy
//! determine it completely. For H in (0, 1) the variance reduces to
//!
//! ```text
//! V(H, k, t) = e^(kt) t^(2H) + (k/2) [ e^(2kt) Im(t) - Ip(t) ],
//! Ipm(x) = int_0^x e^(+-k z) z^(2H) dz,
//! ```
//!
//! obtained by integrating by parts twice against the fBm kernel; the same
//! route gives closed forms at H in {0, 1/2, 1} and the H- and t-derivatives
//! used by the monotonicity analysis. Covariances come in two independent
//! routes: an integration-by-parts assembly valid for all H in (0, 1), and,
//! for H in (1/2, 1), direct nested quadrature of the singular kernel
//! H(2H-1) |u - v|^(2H-2), kept separate as a cross-check.

use crate::error::{Error, Result};
use crate::fbm::{validate_hurst, validate_rate, validate_time};
use crate::quad::{self, QuadConfig, QuadResult};
use crate::special::{gamma, LN_2PI};
use std::cell::Cell;

/// A point (H, t, k) at which the process is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    hurst: f64,
    time: f64,
    rate: f64,
}

impl EvalPoint {
    /// Validated evaluation point: H in [0, 1], t >= 0 finite, k != 0 finite.
    pub fn new(hurst: f64, time: f64, rate: f64) -> Result<Self> {
        validate_hurst(hurst)?;
        validate_time("t", time)?;
        validate_rate(rate)?;
        Ok(EvalPoint { hurst, time, rate })
    }

    /// Evaluation point with the canonical rate k = 1.
    pub fn unit_rate(hurst: f64, time: f64) -> Result<Self> {
        EvalPoint::new(hurst, time, 1.0)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Route that produced a variance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceMethod {
    ClosedFormH0,
    ClosedFormHHalf,
    ClosedFormH1,
    QuadratureGeneral,
}

/// Variance of X_t together with the route taken and an error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceValue {
    pub value: f64,
    pub method: VarianceMethod,
    /// Zero for closed forms; propagated quadrature error otherwise.
    pub abs_err: f64,
}

/// Route that produced a covariance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceMethod {
    /// Integration-by-parts assembly, any H in (0, 1).
    ByPartsAllH,
    /// Nested quadrature of the kernel H(2H-1)|u-v|^(2H-2), H in (1/2, 1).
    SingularKernelHighH,
    /// H = 0 law (k = 1 off the diagonal, any k on it).
    R0Boundary,
    /// H = 1 law, rank-one in e^(kt) - 1.
    H1Boundary,
}

/// Covariance E[X_t X_s] together with the route taken and an error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceValue {
    pub value: f64,
    pub method: CovarianceMethod,
    pub abs_err: f64,
}

/// Differential entropy of the Gaussian marginal X_t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    /// (1 + log 2 pi) / 2 + (log V) / 2, or -inf when V = 0.
    pub value: f64,
}

impl EntropyValue {
    /// False exactly for the degenerate (zero-variance) marginal.
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

// e^(2kt) and e^(k(t+s)) appear as coefficients; past this product the
// exponentials overflow and no finite-precision answer exists.
fn check_exp_range(kt2: f64) -> Result<()> {
    if kt2 > 709.0 {
        return Err(Error::Domain(format!(
            "k t = {:.3} too large: e^(2 k t) overflows f64",
            kt2 / 2.0
        )));
    }
    Ok(())
}

/// int_0^x e^(c z) z^p log^m(z) dz with the z -> 0 endpoint handled by the
/// double-exponential rule. x = 0 yields an exact zero.
fn exp_power_log(c: f64, p: f64, m: u32, x: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    if x == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            abs_err: 0.0,
            subdivisions: 1,
        });
    }
    let f = move |z: f64| {
        let base = (c * z).exp() * z.powf(p);
        match m {
            0 => base,
            _ => base * z.ln().powi(m as i32),
        }
    };
    quad::integrate_endpoint_singular(f, 0.0, x, cfg)
}

/// Variance V(H, k, t) = E[X_t^2] with the default tolerances.
pub fn variance(point: &EvalPoint) -> Result<VarianceValue> {
    variance_with(point, &QuadConfig::default())
}

/// Variance with explicit quadrature tolerances.
///
/// Closed forms are dispatched exactly at H in {0, 1/2, 1}; every other H
/// takes the general quadrature route.
pub fn variance_with(point: &EvalPoint, cfg: &QuadConfig) -> Result<VarianceValue> {
    let (h, t, k) = (point.hurst, point.time, point.rate);
    check_exp_range(2.0 * k * t)?;

    if h == 0.0 {
        // discontinuous at t = 0: the t > 0 branch tends to 1, not 0
        let value = if t == 0.0 {
            0.0
        } else {
            0.5 * ((2.0 * k * t).exp() + 1.0)
        };
        return Ok(VarianceValue {
            value,
            method: VarianceMethod::ClosedFormH0,
            abs_err: 0.0,
        });
    }
    if h == 0.5 {
        return Ok(VarianceValue {
            value: (2.0 * k * t).exp_m1() / (2.0 * k),
            method: VarianceMethod::ClosedFormHHalf,
            abs_err: 0.0,
        });
    }
    if h == 1.0 {
        let e = (k * t).exp_m1() / k;
        return Ok(VarianceValue {
            value: e * e,
            method: VarianceMethod::ClosedFormH1,
            abs_err: 0.0,
        });
    }
    variance_quadrature_with(point, cfg)
}

/// General quadrature route for the variance, exposed so that closed forms
/// can be cross-checked against it at the boundary H values.
pub fn variance_quadrature(point: &EvalPoint) -> Result<VarianceValue> {
    variance_quadrature_with(point, &QuadConfig::default())
}

/// Quadrature route with explicit tolerances.
pub fn variance_quadrature_with(point: &EvalPoint, cfg: &QuadConfig) -> Result<VarianceValue> {
    let (h, t, k) = (point.hurst, point.time, point.rate);
    check_exp_range(2.0 * k * t)?;
    if t == 0.0 {
        return Ok(VarianceValue {
            value: 0.0,
            method: VarianceMethod::QuadratureGeneral,
            abs_err: 0.0,
        });
    }

    let p = 2.0 * h;
    let im = exp_power_log(-k, p, 0, t, cfg)?;
    let ip = exp_power_log(k, p, 0, t, cfg)?;
    let e2 = (2.0 * k * t).exp();
    let mut value = (k * t).exp() * t.powf(p) + 0.5 * k * (e2 * im.value - ip.value);
    let abs_err = 0.5 * k.abs() * (e2 * im.abs_err + ip.abs_err)
        + 4.0 * f64::EPSILON * value.abs();

    // roundoff can push a vanishing variance a hair below zero
    if value < 0.0 {
        if -value <= abs_err.max(f64::EPSILON) {
            value = 0.0;
        } else {
            return Err(Error::NonConvergence {
                value,
                abs_err,
                subdivisions: im.subdivisions.max(ip.subdivisions),
            });
        }
    }

    Ok(VarianceValue {
        value,
        method: VarianceMethod::QuadratureGeneral,
        abs_err,
    })
}

/// Differential entropy of X_t: (1 + log 2 pi) / 2 + (log V) / 2.
///
/// The degenerate marginal (V = 0, i.e. t = 0) yields -inf.
pub fn shannon_entropy(point: &EvalPoint) -> Result<EntropyValue> {
    shannon_entropy_with(point, &QuadConfig::default())
}

/// Entropy with explicit quadrature tolerances.
pub fn shannon_entropy_with(point: &EvalPoint, cfg: &QuadConfig) -> Result<EntropyValue> {
    let v = variance_with(point, cfg)?;
    let value = if v.value == 0.0 {
        f64::NEG_INFINITY
    } else {
        0.5 * (1.0 + LN_2PI) + 0.5 * v.value.ln()
    };
    Ok(EntropyValue { value })
}

/// Covariance E[X_t X_s] with the default tolerances.
pub fn covariance(h: f64, t: f64, s: f64, k: f64) -> Result<CovarianceValue> {
    covariance_with(h, t, s, k, &QuadConfig::default())
}

/// Covariance with explicit quadrature tolerances.
///
/// Symmetric in (t, s) by construction. H = 0 off the diagonal is only
/// defined for k = 1; other rates return Unsupported there.
pub fn covariance_with(h: f64, t: f64, s: f64, k: f64, cfg: &QuadConfig) -> Result<CovarianceValue> {
    validate_hurst(h)?;
    validate_time("t", t)?;
    validate_time("s", s)?;
    validate_rate(k)?;
    let (lo, hi) = if t <= s { (t, s) } else { (s, t) };
    check_exp_range(2.0 * k * hi)?;

    if h == 1.0 {
        let value = ((k * lo).exp_m1() / k) * ((k * hi).exp_m1() / k);
        return Ok(CovarianceValue {
            value,
            method: CovarianceMethod::H1Boundary,
            abs_err: 0.0,
        });
    }
    if h == 0.0 {
        let value = if lo == 0.0 {
            0.0
        } else if lo == hi {
            0.5 * ((2.0 * k * lo).exp() + 1.0)
        } else if k == 1.0 {
            0.5
        } else {
            return Err(Error::Unsupported(format!(
                "H = 0 covariance off the diagonal is only defined for k = 1 (got k = {k})"
            )));
        };
        return Ok(CovarianceValue {
            value,
            method: CovarianceMethod::R0Boundary,
            abs_err: 0.0,
        });
    }
    if lo == 0.0 {
        return Ok(CovarianceValue {
            value: 0.0,
            method: CovarianceMethod::ByPartsAllH,
            abs_err: 0.0,
        });
    }

    // Twice-integrated-by-parts kernel: with R_B the fBm covariance,
    //   R(t, s) = e^(k(t+s)) R_B(t, s)
    //           - k e^(ks) int_0^t e^(ku) R_B(u, s) du
    //           - k e^(kt) int_0^s e^(kv) R_B(t, v) dv
    //           + k^2 int_0^t int_0^s e^(k(u+v)) R_B(u, v) du dv,
    // and every piece reduces to the one-dimensional kernels
    // Ipm(x) = int_0^x e^(+-k w) w^(2H) dw at x in {lo, hi, hi - lo}.
    let p = 2.0 * h;
    let d = hi - lo;
    let ip_lo = exp_power_log(k, p, 0, lo, cfg)?;
    let ip_hi = exp_power_log(k, p, 0, hi, cfg)?;
    let ip_d = exp_power_log(k, p, 0, d, cfg)?;
    let im_lo = exp_power_log(-k, p, 0, lo, cfg)?;
    let im_hi = exp_power_log(-k, p, 0, hi, cfg)?;
    let im_d = exp_power_log(-k, p, 0, d, cfg)?;

    let (e_lo, e_hi) = ((k * lo).exp(), (k * hi).exp());
    let lo_p = lo.powf(p);
    let hi_p = hi.powf(p);
    let r_b = 0.5 * (lo_p + hi_p - d.powf(p));

    // int_0^lo e^(ku) R_B-pieces, assembled per power
    let a_lo = ip_lo.value + hi_p * (e_lo - 1.0) / k - e_hi * (im_hi.value - im_d.value);
    let a_hi = lo_p * (e_hi - 1.0) / k + ip_hi.value - e_lo * im_lo.value - e_lo * ip_d.value;

    // double integral of e^(k(u+v)) |u - v|^p over [0,lo] x [0,hi]
    let w_mix = (e_lo * e_lo - 1.0) / (2.0 * k) * ip_d.value
        + (e_hi * e_hi * (im_hi.value - im_d.value) - (ip_hi.value - ip_d.value)) / (2.0 * k)
        + (e_lo * e_lo * im_lo.value - ip_lo.value) / (2.0 * k);
    let d_term = ip_lo.value * (e_hi - 1.0) / k + (e_lo - 1.0) / k * ip_hi.value - w_mix;

    let value = e_lo * e_hi * r_b - 0.5 * k * (e_hi * a_lo + e_lo * a_hi) + 0.5 * k * k * d_term;

    // sensitivities of the assembled value to each kernel integral collapse
    // to +-k/4 times unit or squared-exponential factors
    let abs_err = 0.25
        * k.abs()
        * (ip_lo.abs_err
            + ip_hi.abs_err
            + e_lo * e_lo * (ip_d.abs_err + im_lo.abs_err)
            + e_hi * e_hi * (im_hi.abs_err + im_d.abs_err))
        + 8.0 * f64::EPSILON * value.abs();

    Ok(CovarianceValue {
        value,
        method: CovarianceMethod::ByPartsAllH,
        abs_err,
    })
}

/// Covariance for H in (1/2, 1) by direct nested quadrature of
///
/// ```text
/// R(t, s) = H(2H-1) int_0^t int_0^s e^(k(u+v)) |u - v|^(2H-2) du dv.
/// ```
///
/// Independent of [`covariance`]; kept as a cross-check route. The inner
/// integral is desingularized by the substitution w = |v - u|^(2H-1), whose
/// Jacobian absorbs the kernel exactly.
pub fn covariance_high_h(h: f64, t: f64, s: f64, k: f64) -> Result<CovarianceValue> {
    covariance_high_h_with(h, t, s, k, &QuadConfig::default())
}

/// Singular-kernel route with explicit tolerances.
pub fn covariance_high_h_with(
    h: f64,
    t: f64,
    s: f64,
    k: f64,
    cfg: &QuadConfig,
) -> Result<CovarianceValue> {
    if !(h > 0.5 && h < 1.0) {
        return Err(Error::Domain(format!(
            "singular-kernel covariance needs H in (1/2, 1), got {h}"
        )));
    }
    validate_time("t", t)?;
    validate_time("s", s)?;
    validate_rate(k)?;
    let (lo, hi) = if t <= s { (t, s) } else { (s, t) };
    check_exp_range(2.0 * k * hi)?;

    if lo == 0.0 {
        return Ok(CovarianceValue {
            value: 0.0,
            method: CovarianceMethod::SingularKernelHighH,
            abs_err: 0.0,
        });
    }

    let q = 2.0 * h - 1.0;
    let inner_cfg = QuadConfig {
        rel_tol: (cfg.rel_tol * 0.1).max(1e-13),
        abs_tol: (cfg.abs_tol * 0.1).max(1e-15),
        max_subdivisions: cfg.max_subdivisions,
    };
    let inner_failure: Cell<Option<Error>> = Cell::new(None);

    // (1/q) int_{w1}^{w2} e^(k (x - w^(1/q))) dw, the inner kernel after the
    // substitution; bounded since its integrand lies in (0, e^(k x)]
    let inner = |x: f64, w1: f64, w2: f64| -> f64 {
        let g = quad::integrate_adaptive(
            |w| (k * (x - w.powf(1.0 / q))).exp(),
            w1,
            w2,
            &inner_cfg,
        );
        match g {
            Ok(r) => r.value / q,
            Err(e) => {
                inner_failure.set(Some(e));
                f64::NAN
            }
        }
    };

    // Split the outer integral at the kink v = lo. On [0, lo] the u > v and
    // u < v contributions are mirror images, so one quadrature serves both.
    let near = quad::integrate_endpoint_singular(
        |v| (k * v).exp() * inner(v, 0.0, v.powf(q)),
        0.0,
        lo,
        cfg,
    );
    let near = match near {
        Ok(r) => r,
        Err(e) => return Err(inner_failure.take().unwrap_or(e)),
    };
    let far = if hi > lo {
        let r = quad::integrate_endpoint_singular(
            |v| (k * v).exp() * inner(v, (v - lo).powf(q), v.powf(q)),
            lo,
            hi,
            cfg,
        );
        match r {
            Ok(r) => r,
            Err(e) => return Err(inner_failure.take().unwrap_or(e)),
        }
    } else {
        QuadResult {
            value: 0.0,
            abs_err: 0.0,
            subdivisions: 1,
        }
    };

    let scale = h * q;
    let value = scale * (2.0 * near.value + far.value);
    let abs_err = scale * (2.0 * near.abs_err + far.abs_err)
        + value.abs() * (10.0 * inner_cfg.rel_tol);

    Ok(CovarianceValue {
        value,
        method: CovarianceMethod::SingularKernelHighH,
        abs_err,
    })
}

/// First partial derivative of the variance in H:
///
/// ```text
/// dV/dH = 2 e^(kt) t^(2H) log t
///       + k [ e^(2kt) int_0^t e^(-kz) z^(2H) log z dz
///                    - int_0^t e^(kz)  z^(2H) log z dz ].
/// ```
///
/// Defined for t > 0; at H = 0 the formula holds with t^0 = z^0 = 1 (the
/// derivative does not extend to t = 0 there).
pub fn dvariance_dh(point: &EvalPoint) -> Result<f64> {
    dvariance_dh_with(point, &QuadConfig::default())
}

/// H-derivative with explicit tolerances.
pub fn dvariance_dh_with(point: &EvalPoint, cfg: &QuadConfig) -> Result<f64> {
    let (h, t, k) = (point.hurst, point.time, point.rate);
    if t == 0.0 {
        return Err(Error::Domain(
            "dV/dH needs t > 0: log t diverges at t = 0".into(),
        ));
    }
    check_exp_range(2.0 * k * t)?;
    let p = 2.0 * h;
    let im = exp_power_log(-k, p, 1, t, cfg)?;
    let ip = exp_power_log(k, p, 1, t, cfg)?;
    Ok(2.0 * (k * t).exp() * t.powf(p) * t.ln()
        + k * ((2.0 * k * t).exp() * im.value - ip.value))
}

/// Second partial derivative of the variance in H:
///
/// ```text
/// d2V/dH2 = 4 e^(kt) t^(2H) log^2 t
///         + 2 k [ e^(2kt) int_0^t e^(-kz) z^(2H) log^2 z dz
///                        - int_0^t e^(kz)  z^(2H) log^2 z dz ].
/// ```
///
/// Strictly positive for every t > 0, which makes V strictly convex in H.
pub fn d2variance_dh2(point: &EvalPoint) -> Result<f64> {
    d2variance_dh2_with(point, &QuadConfig::default())
}

/// Second H-derivative with explicit tolerances.
pub fn d2variance_dh2_with(point: &EvalPoint, cfg: &QuadConfig) -> Result<f64> {
    let (h, t, k) = (point.hurst, point.time, point.rate);
    if h == 0.0 {
        return Err(Error::Domain("d2V/dH2 needs H > 0".into()));
    }
    if t == 0.0 {
        return Err(Error::Domain(
            "d2V/dH2 needs t > 0: log t diverges at t = 0".into(),
        ));
    }
    check_exp_range(2.0 * k * t)?;
    let p = 2.0 * h;
    let im = exp_power_log(-k, p, 2, t, cfg)?;
    let ip = exp_power_log(k, p, 2, t, cfg)?;
    let lt = t.ln();
    Ok(4.0 * (k * t).exp() * t.powf(p) * lt * lt
        + 2.0 * k * ((2.0 * k * t).exp() * im.value - ip.value))
}

/// Partial derivative of the variance in t:
///
/// ```text
/// dV/dt = k e^(kt) t^(2H) + 2H e^(kt) t^(2H-1) + k^2 e^(2kt) Im(t),
/// ```
///
/// valid for every k != 0 and H in [0, 1], t > 0 (at H = 0 it reduces to the
/// derivative k e^(2kt) of the t > 0 branch). Strictly positive when k > 0,
/// and still positive for k < 0 when H >= 1/2; below 1/2 the negative-rate
/// variance eventually decreases, past a crossing time that grows as
/// H approaches 1/2.
pub fn dvariance_dt(point: &EvalPoint) -> Result<f64> {
    dvariance_dt_with(point, &QuadConfig::default())
}

/// t-derivative with explicit tolerances.
pub fn dvariance_dt_with(point: &EvalPoint, cfg: &QuadConfig) -> Result<f64> {
    let (h, t, k) = (point.hurst, point.time, point.rate);
    if t == 0.0 {
        return Err(Error::Domain(
            "dV/dt needs t > 0: t^(2H-1) diverges at t = 0 for H < 1/2".into(),
        ));
    }
    check_exp_range(2.0 * k * t)?;
    let p = 2.0 * h;
    let im = exp_power_log(-k, p, 0, t, cfg)?;
    let ekt = (k * t).exp();
    Ok(k * ekt * t.powf(p)
        + p * ekt * t.powf(p - 1.0)
        + k * k * (2.0 * k * t).exp() * im.value)
}

/// Long-horizon limit of e^(-2kt) V(H, k, t) for k > 0: Gamma(2H + 1) / 2.
pub fn asymptotic_limit(h: f64) -> Result<f64> {
    validate_hurst(h)?;
    Ok(0.5 * gamma(2.0 * h + 1.0))
}
