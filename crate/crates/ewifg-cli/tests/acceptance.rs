//! Acceptance gate: twelve numbered criteria, one test and one PASS line
//! each. Tolerances are pinned in the asserts; timed criteria carry their
//! wall-clock budgets. Run with `--nocapture` to see the PASS lines.

use ewifg::analysis::{
    brent_root, crossing_time_half_one, crossing_time_zero_half, crossing_time_zero_one,
    find_min_h, Regime, LN_2_PLUS_SQRT_3, LN_3,
};
use ewifg::mc::estimate_variance;
use ewifg::process::{
    asymptotic_limit, covariance, covariance_high_h, d2variance_dh2, dvariance_dh, dvariance_dt,
    variance, variance_quadrature, variance_quadrature_with, EvalPoint, VarianceMethod,
};
use ewifg::quad::QuadConfig;
use ewifg::special::{exp_log_moment, EULER_GAMMA};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::time::Instant;

fn pt(h: f64, t: f64, k: f64) -> EvalPoint {
    EvalPoint::new(h, t, k).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn criterion_01_thresholds_cli_reports_tau1_and_tau_half() {
    let start = Instant::now();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ewifg"))
        .args(["thresholds", "--rate", "1"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).expect("utf-8 output");
    let field = |name: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(name).and_then(|r| r.strip_prefix(' ')))
            .unwrap_or_else(|| panic!("missing `{name}` line in:\n{text}"))
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    let tau1 = field("tau1");
    let tau_half = field("tau_half");
    assert!((tau1 - 1.05368).abs() <= 5e-4, "tau1 = {tau1}");
    assert!((tau_half - 1.19142).abs() <= 5e-4, "tau_half = {tau_half}");
    assert!(
        1.0 < tau1 && tau1 < LN_3 && LN_3 < tau_half,
        "ordering violated: tau1 = {tau1}, log3 = {LN_3}, tau_half = {tau_half}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:.2?}");
    println!(
        "PASS criterion 1: tau1 = {tau1:.6}, tau_half = {tau_half:.6}, 1 < tau1 < log3 < tau_half ({elapsed:.2?})"
    );
}

#[test]
fn criterion_02_minimizing_hurst_indices_match_the_figures() {
    let start = Instant::now();
    let cases = [
        (1.08, 0.8102, Regime::InteriorMinHighH),
        (LN_3, 0.7232, Regime::InteriorMinHighH),
        (1.15, 0.5731, Regime::InteriorMinHighH),
        (1.25, 0.4314, Regime::InteriorMinLowH),
        (LN_2_PLUS_SQRT_3, 0.3801, Regime::InteriorMinLowH),
        (1.5, 0.3055, Regime::InteriorMinLowH),
    ];
    for (t, h_expected, regime) in cases {
        let m = find_min_h(t, 1.0, 1e-10).unwrap();
        assert!(
            (m.h_star - h_expected).abs() <= 5e-3,
            "t = {t}: h_star = {}, want {h_expected}",
            m.h_star
        );
        assert_eq!(m.regime, regime, "t = {t}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:.2?}");
    println!("PASS criterion 2: six minimizing Hurst indices within 5e-3 ({elapsed:.2?})");
}

#[test]
fn criterion_03_closed_form_pins() {
    // V(1/2, log 3) = V(1, log 3) = 4
    for h in [0.5, 1.0] {
        let closed = variance(&pt(h, LN_3, 1.0)).unwrap();
        assert!(
            (closed.value - 4.0).abs() <= 1e-10,
            "H = {h}: closed form {}",
            closed.value
        );
        assert_ne!(closed.method, VarianceMethod::QuadratureGeneral);
        let quad = variance_quadrature(&pt(h, LN_3, 1.0)).unwrap();
        assert!(
            (quad.value - 4.0).abs() <= 1e-8,
            "H = {h}: quadrature {}",
            quad.value
        );
    }
    // V(0, t) = (e^(2t) + 1) / 2 on a t grid
    for i in 1..=20 {
        let t = 0.1 * i as f64;
        let want = 0.5 * ((2.0 * t).exp() + 1.0);
        let got = variance(&pt(0.0, t, 1.0)).unwrap().value;
        assert!((got - want).abs() <= 1e-10 * want.max(1.0), "t = {t}");
    }
    // V(1, k, t) = (e^(kt) - 1)^2 / k^2 on a (k, t) grid
    for k in [-1.5, -0.5, 0.7, 1.0, 2.0] {
        for i in 1..=20 {
            let t = 0.1 * i as f64;
            let e = (k * t).exp_m1() / k;
            let want = e * e;
            let got = variance(&pt(1.0, t, k)).unwrap().value;
            assert!(
                (got - want).abs() <= 1e-10 * want.max(1.0),
                "k = {k}, t = {t}"
            );
        }
    }
    println!("PASS criterion 3: V(1/2, log3) = V(1, log3) = 4; H = 0 and H = 1 closed forms pinned on grids");
}

#[test]
fn criterion_04_crossing_times() {
    let vv = |h: f64, t: f64, k: f64| variance(&pt(h, t, k)).unwrap().value;

    // k = 1: numeric root of V(0, .) - V(1, .)
    let (analytic, numeric) = crossing_time_zero_one(1e-12).unwrap();
    assert!((numeric - 1.31696).abs() <= 1e-4, "numeric root {numeric}");
    assert!((analytic - LN_2_PLUS_SQRT_3).abs() <= 1e-15);

    // V(0) x V(1/2) crossings, |k| < 1
    for k in [0.5, -0.5, 0.9, -0.9] {
        let (t_star, v_star) = crossing_time_zero_half(k).unwrap();
        let root = brent_root(|t| Ok(vv(0.0, t, k) - vv(0.5, t, k)), 0.4, 2.6, 1e-12).unwrap();
        assert!((root - t_star).abs() <= 1e-8, "k = {k}: root {root} vs {t_star}");
        assert!((v_star - 1.0 / (1.0 - k)).abs() <= 1e-12, "k = {k}");
        for h in [0.0, 0.5] {
            let v = vv(h, t_star, k);
            assert!(
                (v - v_star).abs() <= 1e-10 * v_star.max(1.0),
                "k = {k}, H = {h}: V = {v} vs common {v_star}"
            );
        }
    }
    assert!(crossing_time_zero_half(1.5).is_err());
    assert!(crossing_time_zero_half(-1.5).is_err());

    // V(1/2) x V(1) crossings, |k| < 2
    for k in [0.5, -0.5, 0.9, -0.9, 1.5, -1.5] {
        let (t_star, v_star) = crossing_time_half_one(k).unwrap();
        let root = brent_root(|t| Ok(vv(0.5, t, k) - vv(1.0, t, k)), 0.4, 2.0, 1e-12).unwrap();
        assert!((root - t_star).abs() <= 1e-8, "k = {k}: root {root} vs {t_star}");
        let denom = (2.0 - k) * (2.0 - k);
        assert!((v_star - 4.0 / denom).abs() <= 1e-12, "k = {k}");
        for h in [0.5, 1.0] {
            let v = vv(h, t_star, k);
            assert!(
                (v - v_star).abs() <= 1e-10 * v_star.max(1.0),
                "k = {k}, H = {h}: V = {v} vs common {v_star}"
            );
        }
    }
    println!("PASS criterion 4: zero-one root at log(2+sqrt3) +- 1e-4; general-k crossings match numeric roots to 1e-8 with the common variances verified");
}

#[test]
fn criterion_05_scaling_identity_on_a_grid() {
    let mut worst = 0.0f64;
    for i in 0..21 {
        let h = i as f64 / 20.0;
        for j in 1..=16 {
            let t = 0.1 * j as f64;
            let plus = variance(&pt(h, t, 1.0)).unwrap().value;
            let minus = variance(&pt(h, t, -1.0)).unwrap().value;
            let rel = (minus - (-2.0 * t).exp() * plus).abs() / plus;
            worst = worst.max(rel);
        }
    }
    assert!(worst <= 1e-9, "worst relative defect {worst:e}");
    println!("PASS criterion 5: V(H, -1, t) = e^(-2t) V(H, 1, t) on a 21 x 16 grid, worst defect {worst:.1e}");
}

#[test]
fn criterion_06_covariance_routes_agree() {
    let mut worst = 0.0f64;
    for h in [0.6, 0.75, 0.9] {
        for t in [0.5, 1.0, 2.0] {
            for s in [0.5, 1.0, 2.0] {
                let a = covariance(h, t, s, 1.0).unwrap().value;
                let b = covariance_high_h(h, t, s, 1.0).unwrap().value;
                let rel = (a - b).abs() / a.abs().max(b.abs());
                worst = worst.max(rel);
                assert!(
                    rel <= 1e-6,
                    "H = {h}, (t, s) = ({t}, {s}): by-parts {a} vs singular-kernel {b}"
                );
            }
        }
        // the diagonal is the variance
        let d = covariance(h, 1.0, 1.0, 1.0).unwrap().value;
        let v = variance(&pt(h, 1.0, 1.0)).unwrap().value;
        assert!((d - v).abs() <= 1e-8 * v.max(1.0), "H = {h}");
    }
    println!("PASS criterion 6: by-parts and singular-kernel covariances agree within 1e-6 relative (worst {worst:.1e})");
}

#[test]
fn criterion_07_derivatives_match_finite_differences() {
    let tight = QuadConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_subdivisions: 2000,
    };
    let vq = |h: f64, t: f64, k: f64| {
        variance_quadrature_with(&pt(h, t, k), &tight).unwrap().value
    };
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let h = rng.gen_range(0.05..0.95);
        let t = rng.gen_range(0.2..2.5);
        let mag = rng.gen_range(0.25..1.5);
        let k = if rng.gen_bool(0.5) { mag } else { -mag };

        let d1 = dvariance_dh(&pt(h, t, k)).unwrap();
        let eps1 = 1e-5;
        let fd1 = (vq(h + eps1, t, k) - vq(h - eps1, t, k)) / (2.0 * eps1);
        assert!(
            rel_close(d1, fd1, 1e-5),
            "(H, t, k) = ({h}, {t}, {k}): dV/dH {d1} vs fd {fd1}"
        );

        let d2 = d2variance_dh2(&pt(h, t, k)).unwrap();
        let eps2 = 1e-3;
        let fd2 = (vq(h + eps2, t, k) - 2.0 * vq(h, t, k) + vq(h - eps2, t, k)) / (eps2 * eps2);
        assert!(
            rel_close(d2, fd2, 1e-4),
            "(H, t, k) = ({h}, {t}, {k}): d2V/dH2 {d2} vs fd {fd2}"
        );
        assert!(d2 > 0.0, "(H, t, k) = ({h}, {t}, {k}): d2V/dH2 = {d2}");

        let dt = dvariance_dt(&pt(h, t, 1.0)).unwrap();
        assert!(dt > 0.0, "(H, t) = ({h}, {t}): dV/dt = {dt} at k = 1");
    }
    // k = -1: the t-monotonicity splits at H = 1/2. Above it the variance
    // keeps increasing; below it the derivative has gone negative by t = 2.5
    // for H <= 0.25 (the sign change sits well before that).
    for h in [0.1, 0.25] {
        let d = dvariance_dt(&pt(h, 2.5, -1.0)).unwrap();
        assert!(d < 0.0, "H = {h}: dV/dt = {d} at k = -1, t = 2.5");
    }
    for h in [0.5, 0.75, 0.9] {
        for t in [0.3, 1.0, 2.5] {
            let d = dvariance_dt(&pt(h, t, -1.0)).unwrap();
            assert!(d > 0.0, "H = {h}, t = {t}: dV/dt = {d} at k = -1");
        }
    }
    println!("PASS criterion 7: dV/dH and d2V/dH2 match finite differences at 50 seeded points; d2V/dH2 > 0; dV/dt > 0 at k = 1; k = -1 sign split at H = 1/2");
}

#[test]
fn criterion_08_large_time_asymptotics() {
    for h in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let v = variance(&pt(h, 30.0, 1.0)).unwrap().value;
        let scaled = (-60.0f64).exp() * v;
        let limit = asymptotic_limit(h).unwrap();
        assert!(
            (scaled - limit).abs() <= 1e-3,
            "H = {h}: e^(-60) V = {scaled} vs Gamma(2H+1)/2 = {limit}"
        );
    }
    println!("PASS criterion 8: e^(-60) V(H, 30) within 1e-3 of Gamma(2H+1)/2 for H in {{0, 1/4, 1/2, 3/4, 1}}");
}

#[test]
fn criterion_09_monte_carlo_certification() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for h in [0.25, 0.5, 0.75, 1.0] {
        for k in [1.0, -1.0] {
            let est = estimate_variance(h, 1.0, k, 20000, 1024, 42).unwrap();
            let v = variance(&pt(h, 1.0, k)).unwrap().value;
            let z = (est.variance_hat - v) / est.std_error;
            worst = worst.max(z.abs());
            assert!(
                z.abs() <= 4.0,
                "(H, k) = ({h}, {k}): z = {z:.2} (mc {} vs analytic {v})",
                est.variance_hat
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:.2?}");
    println!("PASS criterion 9: |z| <= 4 for all eight (H, k) configurations, worst |z| = {worst:.2} ({elapsed:.2?})");
}

#[test]
fn criterion_10_appendix_integrals() {
    let cfg = QuadConfig::default();
    let cases = [
        (0, -EULER_GAMMA),
        (1, 1.0 - EULER_GAMMA),
        (2, 3.0 - 2.0 * EULER_GAMMA),
    ];
    for (m, want) in cases {
        let got = exp_log_moment(m, &cfg).unwrap().value;
        assert!((got - want).abs() <= 1e-7, "m = {m}: {got} vs {want}");
        if m == 0 {
            assert!(got < 0.0);
        } else {
            assert!(got > 0.0);
        }
    }
    println!("PASS criterion 10: the three exponential-log integrals match -gamma, 1-gamma, 3-2gamma within 1e-7 with signs (-, +, +)");
}

#[test]
fn criterion_11_covariance_gram_matrices_are_psd() {
    let mut rng = ChaCha12Rng::seed_from_u64(77);
    for grid_index in 0..20 {
        let mut times: Vec<f64> = Vec::with_capacity(8);
        while times.len() < 8 {
            let c = rng.gen_range(0.05..2.5);
            if times.iter().all(|&x| (x - c).abs() > 1e-2) {
                times.push(c);
            }
        }
        times.sort_by(f64::total_cmp);
        for h in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let gram = DMatrix::from_fn(8, 8, |i, j| {
                covariance(h, times[i], times[j], 1.0).unwrap().value
            });
            let max_diag = (0..8).map(|i| gram[(i, i)]).fold(0.0f64, f64::max);
            let min_eig = gram
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(
                min_eig >= -1e-8 * max_diag,
                "grid {grid_index}, H = {h}: min eigenvalue {min_eig:e} (max diag {max_diag:e})"
            );
        }
    }
    println!("PASS criterion 11: Gram matrices on 20 random 8-point grids are PSD for H in {{0, 1/4, 1/2, 3/4, 1}}");
}

#[test]
fn criterion_12_continuity_across_h_half() {
    for t in [0.5f64, 1.0, 2.0] {
        let want = (2.0 * t).exp_m1() / 2.0;
        for h in [0.5 - 1e-6, 0.5 + 1e-6] {
            let v = variance(&pt(h, t, 1.0)).unwrap();
            assert_eq!(v.method, VarianceMethod::QuadratureGeneral);
            assert!(
                (v.value - want).abs() <= 1e-4,
                "H = {h}, t = {t}: {} vs {want}",
                v.value
            );
        }
    }
    println!("PASS criterion 12: quadrature V(1/2 +- 1e-6, t) within 1e-4 of (e^(2t) - 1)/2");
}
