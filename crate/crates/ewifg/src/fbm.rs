//! Fractional Brownian motion covariance, including the degenerate endpoints
//! of the Hurst range.
//!
//! For H in (0, 1) this is the standard two-sided kernel
//!
//! ```text
//! R_B(t, s) = (t^(2H) + s^(2H) - |t - s|^(2H)) / 2.
//! ```
//!
//! The boundary laws extend it: at H = 1 the process is B_t = t xi for a
//! single standard normal xi, so R_B(t, s) = t s; at H = 0 it is
//! B_t = (xi_t + eta) / sqrt 2 with i.i.d. standard normals, giving 0 when
//! t s = 0 (B_0 = 0), 1 on the diagonal and 1/2 off it.

use crate::error::{Error, Result};

/// Covariance E[B^H_t B^H_s] of fractional Brownian motion.
pub fn fbm_covariance(h: f64, t: f64, s: f64) -> Result<f64> {
    validate_hurst(h)?;
    validate_time("t", t)?;
    validate_time("s", s)?;

    if h == 1.0 {
        return Ok(t * s);
    }
    if h == 0.0 {
        return Ok(if t.min(s) == 0.0 {
            0.0
        } else if t == s {
            1.0
        } else {
            0.5
        });
    }
    let p = 2.0 * h;
    Ok(0.5 * (t.powf(p) + s.powf(p) - (t - s).abs().powf(p)))
}

pub(crate) fn validate_hurst(h: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::Domain(format!("Hurst index {h} outside [0, 1]")));
    }
    Ok(())
}

pub(crate) fn validate_time(name: &str, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("{name} = {t} must be finite and >= 0")));
    }
    Ok(())
}

pub(crate) fn validate_rate(k: f64) -> Result<()> {
    if !k.is_finite() || k == 0.0 {
        return Err(Error::Domain(format!("rate k = {k} must be finite and nonzero")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_case_is_min() {
        // H = 1/2: R_B(t, s) = min(t, s)
        assert_eq!(fbm_covariance(0.5, 2.0, 3.0).unwrap(), 2.0);
        assert_eq!(fbm_covariance(0.5, 3.0, 2.0).unwrap(), 2.0);
        assert_eq!(fbm_covariance(0.5, 1.5, 1.5).unwrap(), 1.5);
    }

    #[test]
    fn boundary_laws() {
        assert_eq!(fbm_covariance(1.0, 2.0, 3.0).unwrap(), 6.0);
        assert_eq!(fbm_covariance(0.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(fbm_covariance(0.0, 1.0, 2.0).unwrap(), 0.5);
        assert_eq!(fbm_covariance(0.0, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn vanishes_at_the_origin() {
        for h in [0.0, 0.3, 0.5, 0.8, 1.0] {
            assert_eq!(fbm_covariance(h, 0.0, 1.7).unwrap(), 0.0, "h = {h}");
        }
    }

    #[test]
    fn diagonal_is_power_law() {
        let h = 0.7;
        let t: f64 = 1.9;
        let got = fbm_covariance(h, t, t).unwrap();
        assert!((got - t.powf(2.0 * h)).abs() <= 1e-15 * got);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(fbm_covariance(1.2, 1.0, 1.0).is_err());
        assert!(fbm_covariance(-0.1, 1.0, 1.0).is_err());
        assert!(fbm_covariance(0.5, -1.0, 1.0).is_err());
        assert!(fbm_covariance(0.5, 1.0, f64::NAN).is_err());
    }
}
