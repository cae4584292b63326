//! Monte Carlo oracle for the analytic evaluators.
//!
//! Fractional Brownian paths are drawn exactly on a uniform grid from the
//! dense Cholesky factor of the fBm Gram matrix; the weighted integral
//! X_t = int_0^t e^(k s) dB^H_s is then discretized either as a left-endpoint
//! Riemann-Stieltjes sum (reliable for H >= 1/2) or through the pathwise
//! integration-by-parts identity
//!
//! ```text
//! X_t = e^(k t) B_t - k int_0^t e^(k s) B_s ds
//! ```
//!
//! with a trapezoid rule (preferred for H < 1/2, where increments are too
//! rough for the direct sum).
//!
//! Determinism: path i draws from stream i of a counter-based generator
//! seeded once, so results are bit-identical for a fixed (seed, n_paths,
//! n_steps) regardless of thread count or schedule. Sums are reduced
//! pairwise in index order for the same reason.

use crate::error::{Error, Result};
use crate::fbm::{fbm_covariance, validate_hurst, validate_rate};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Uniform sampling grid on (0, horizon]: times (i+1) * step, the last pinned
/// to the horizon exactly. The origin is excluded (B_0 = 0 identically).
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    times: Vec<f64>,
    horizon: f64,
    step: f64,
}

impl PathGrid {
    /// Grid with n_steps >= 2 uniform steps covering (0, horizon].
    pub fn uniform(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Domain(format!(
                "horizon {horizon} must be positive and finite"
            )));
        }
        if n_steps < 2 {
            return Err(Error::Domain(format!(
                "n_steps = {n_steps} too small: at least 2 steps required"
            )));
        }
        let step = horizon / n_steps as f64;
        let times = (1..=n_steps)
            .map(|i| if i == n_steps { horizon } else { i as f64 * step })
            .collect();
        Ok(PathGrid {
            times,
            horizon,
            step,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_steps(&self) -> usize {
        self.times.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

/// Monte Carlo variance estimate with its own sampling error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Unbiased sample variance of the path integrals.
    pub variance_hat: f64,
    /// Standard error of variance_hat under Gaussianity:
    /// variance_hat * sqrt(2 / (n_paths - 1)).
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

enum Sampler {
    /// Lower-triangular Cholesky factor of the Gram matrix, row-major.
    Factor(Vec<f64>),
    /// H = 1: B_t = t xi for one standard normal per path.
    Slope,
}

fn stream_rng(seed: u64, path_index: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(path_index as u64);
    rng
}

/// In-place lower Cholesky of a row-major symmetric matrix; the strict upper
/// triangle is left untouched and must not be read afterwards.
fn cholesky_lower(a: &mut [f64], n: usize) -> std::result::Result<(), usize> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return Err(j);
        }
        let root = d.sqrt();
        a[j * n + j] = root;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / root;
        }
    }
    Ok(())
}

fn build_sampler(h: f64, grid: &PathGrid) -> Result<Sampler> {
    if h == 1.0 {
        return Ok(Sampler::Slope);
    }
    let times = grid.times();
    let n = times.len();
    let mut gram = vec![0.0_f64; n * n];
    let mut max_diag: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            let c = fbm_covariance(h, times[i], times[j])?;
            gram[i * n + j] = c;
            gram[j * n + i] = c;
        }
        max_diag = max_diag.max(gram[i * n + i]);
    }

    let mut factor = gram.clone();
    if cholesky_lower(&mut factor, n).is_ok() {
        return Ok(Sampler::Factor(factor));
    }
    // one round of diagonal jitter against roundoff-scale indefiniteness
    let jitter = 1e-12 * max_diag;
    for i in 0..n {
        gram[i * n + i] += jitter;
    }
    match cholesky_lower(&mut gram, n) {
        Ok(()) => Ok(Sampler::Factor(gram)),
        Err(pivot) => Err(Error::CholeskyFailed { pivot }),
    }
}

fn sample_path(sampler: &Sampler, times: &[f64], rng: &mut ChaCha12Rng) -> Vec<f64> {
    let n = times.len();
    match sampler {
        Sampler::Slope => {
            let xi: f64 = StandardNormal.sample(rng);
            times.iter().map(|&t| t * xi).collect()
        }
        Sampler::Factor(l) => {
            let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            let mut path = vec![0.0_f64; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..=i {
                    acc += l[i * n + j] * z[j];
                }
                path[i] = acc;
            }
            path
        }
    }
}

/// Exact-in-law fBm sample paths on the grid, one inner Vec per path.
///
/// Deterministic in (seed, path index); threads only affect wall time.
pub fn fbm_paths(h: f64, grid: &PathGrid, n_paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    validate_hurst(h)?;
    if n_paths == 0 {
        return Err(Error::Domain("n_paths must be at least 1".into()));
    }
    let sampler = build_sampler(h, grid)?;
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            sample_path(&sampler, grid.times(), &mut rng)
        })
        .collect())
}

/// Left-endpoint Riemann-Stieltjes discretization of int e^(k s) dB_s.
///
/// Converges pathwise for H >= 1/2; for rougher paths use
/// [`integral_by_parts`] instead.
pub fn integral_riemann(path: &[f64], grid: &PathGrid, k: f64) -> Result<f64> {
    validate_rate(k)?;
    let times = grid.times();
    if path.len() != times.len() {
        return Err(Error::GridMismatch {
            path_len: path.len(),
            grid_len: times.len(),
        });
    }
    let mut acc = 0.0;
    let mut s_prev = 0.0;
    let mut b_prev = 0.0;
    for (i, &b) in path.iter().enumerate() {
        acc += (k * s_prev).exp() * (b - b_prev);
        s_prev = times[i];
        b_prev = b;
    }
    Ok(acc)
}

/// Integration-by-parts discretization e^(kT) B_T - k * trapezoid(e^(ks) B_s).
///
/// Avoids differencing the path, so it tolerates any Hurst roughness.
pub fn integral_by_parts(path: &[f64], grid: &PathGrid, k: f64) -> Result<f64> {
    validate_rate(k)?;
    let times = grid.times();
    if path.len() != times.len() {
        return Err(Error::GridMismatch {
            path_len: path.len(),
            grid_len: times.len(),
        });
    }
    let mut trap = 0.0;
    let mut s_prev = 0.0;
    let mut g_prev = 0.0; // e^(k*0) B_0 = 0
    for (i, &b) in path.iter().enumerate() {
        let s = times[i];
        let g = (k * s).exp() * b;
        trap += 0.5 * (g_prev + g) * (s - s_prev);
        s_prev = s;
        g_prev = g;
    }
    let b_end = *path.last().expect("grid has at least 2 times");
    Ok((k * grid.horizon()).exp() * b_end - k * trap)
}

/// Monte Carlo estimate of V(H, k, t) from n_paths exact fBm paths on an
/// n_steps uniform grid. H = 0 is excluded (the integral has no pathwise
/// meaning there); H < 1/2 uses the by-parts discretization, H >= 1/2 the
/// Riemann sum.
pub fn estimate_variance(
    h: f64,
    t: f64,
    k: f64,
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<McEstimate> {
    validate_hurst(h)?;
    if h == 0.0 {
        return Err(Error::Unsupported(
            "H = 0 paths are too irregular to integrate against; simulation covers H in (0, 1]"
                .into(),
        ));
    }
    validate_rate(k)?;
    if n_paths < 2 {
        return Err(Error::Domain(format!(
            "n_paths = {n_paths} too small: the variance estimate needs at least 2"
        )));
    }
    let grid = PathGrid::uniform(t, n_steps)?;
    let sampler = build_sampler(h, &grid)?;
    let by_parts = h < 0.5;

    let integrals: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let path = sample_path(&sampler, grid.times(), &mut rng);
            if by_parts {
                integral_by_parts(&path, &grid, k)
            } else {
                integral_riemann(&path, &grid, k)
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = n_paths as f64;
    let mean = pairwise_sum(&integrals) / n;
    let centered: Vec<f64> = integrals.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance_hat = pairwise_sum(&centered) / (n - 1.0);
    let std_error = variance_hat * (2.0 / (n - 1.0)).sqrt();
    Ok(McEstimate {
        mean,
        variance_hat,
        std_error,
        n_paths,
        seed,
    })
}

/// Index-ordered pairwise reduction; the result does not depend on thread
/// count because it is not a parallel reduction at all.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_construction() {
        let g = PathGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.times(), &[0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.n_steps(), 4);
        assert_eq!(g.horizon(), 2.0);
        assert_eq!(g.step(), 0.5);
        // last time is the horizon even when the step does not divide evenly
        let g = PathGrid::uniform(1.0, 3).unwrap();
        assert_eq!(*g.times().last().unwrap(), 1.0);
        assert!(g.times()[0] > 0.0);
    }

    #[test]
    fn grid_validation() {
        assert!(PathGrid::uniform(0.0, 4).is_err());
        assert!(PathGrid::uniform(-1.0, 4).is_err());
        assert!(PathGrid::uniform(1.0, 1).is_err());
    }

    #[test]
    fn riemann_single_jump() {
        // B jumps to 1 on the first step and stays: only the first increment
        // contributes, weighted by e^(k * 0) = 1
        let g = PathGrid::uniform(1.0, 2).unwrap();
        let x = integral_riemann(&[1.0, 1.0], &g, 2.0).unwrap();
        assert_eq!(x, 1.0);
    }

    #[test]
    fn by_parts_linear_path() {
        // B_s = s, k = 1: int_0^1 e^s ds = e - 1 exactly
        let n = 4000;
        let g = PathGrid::uniform(1.0, n).unwrap();
        let path: Vec<f64> = g.times().to_vec();
        let x = integral_by_parts(&path, &g, 1.0).unwrap();
        assert!((x - 1.0_f64.exp_m1()).abs() <= 1e-6, "got {x}");
        // the Riemann form converges to the same limit on a smooth path
        let r = integral_riemann(&path, &g, 1.0).unwrap();
        assert!((r - 1.0_f64.exp_m1()).abs() <= 1e-3, "got {r}");
    }

    #[test]
    fn zero_path_integrates_to_zero() {
        let g = PathGrid::uniform(1.0, 8).unwrap();
        let z = vec![0.0; 8];
        assert_eq!(integral_riemann(&z, &g, 1.0).unwrap(), 0.0);
        assert_eq!(integral_by_parts(&z, &g, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g = PathGrid::uniform(1.0, 8).unwrap();
        assert!(matches!(
            integral_riemann(&[0.0; 5], &g, 1.0),
            Err(Error::GridMismatch {
                path_len: 5,
                grid_len: 8
            })
        ));
        assert!(integral_by_parts(&[0.0; 5], &g, 1.0).is_err());
    }

    #[test]
    fn slope_sampler_at_h1() {
        let g = PathGrid::uniform(2.0, 5).unwrap();
        let paths = fbm_paths(1.0, &g, 3, 7).unwrap();
        for p in &paths {
            let slope = p[0] / g.times()[0];
            for (i, &v) in p.iter().enumerate() {
                assert!((v - slope * g.times()[i]).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
        // distinct streams yield distinct slopes
        assert_ne!(paths[0][0], paths[1][0]);
    }

    #[test]
    fn paths_are_reproducible_and_stream_separated() {
        let g = PathGrid::uniform(1.0, 16).unwrap();
        let a = fbm_paths(0.7, &g, 4, 99).unwrap();
        let b = fbm_paths(0.7, &g, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = fbm_paths(0.7, &g, 4, 100).unwrap();
        assert_ne!(a, c);
        // prefix stability: first paths agree regardless of how many follow
        let d = fbm_paths(0.7, &g, 2, 99).unwrap();
        assert_eq!(&a[..2], &d[..]);
    }

    #[test]
    fn estimate_validates_inputs() {
        assert!(matches!(
            estimate_variance(0.0, 1.0, 1.0, 10, 8, 1),
            Err(Error::Unsupported(_))
        ));
        assert!(estimate_variance(0.5, 1.0, 1.0, 1, 8, 1).is_err());
        assert!(estimate_variance(0.5, 0.0, 1.0, 10, 8, 1).is_err());
        assert!(estimate_variance(0.5, 1.0, 0.0, 10, 8, 1).is_err());
    }

    #[test]
    fn estimate_is_deterministic() {
        let a = estimate_variance(0.5, 1.0, 1.0, 64, 32, 2024).unwrap();
        let b = estimate_variance(0.5, 1.0, 1.0, 64, 32, 2024).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_paths, 64);
        assert_eq!(a.seed, 2024);
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() <= 1e-9 * naive.abs().max(1.0));
    }
}
