//! Checks the density, CDF, sampler and pay functional against oracles that
//! only use the pointwise density formula.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use will_testing::{DensityF64, QuadratureSpec};

/// `int_a^b g(t) den(t) dt` by Simpson in `v`, with `t = T (1 - v^m)`.
///
/// Picking `m >= 4 / (gamma + 1)` turns the endpoint singularity of `den` at
/// `T` into a factor `v^(m (gamma + 1) - 1)` with exponent at least 3.
fn oracle_integral(d: &DensityF64, a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let t = d.horizon();
    let rho = d.rho();
    let gamma = (2.0 * rho - 1.0) / (1.0 - rho);
    let alpha = (1.0 - rho) * t.powf(rho / (1.0 - rho)) / rho;
    let m = (4.0 / (gamma + 1.0)).ceil().max(1.0);
    let to_v = |x: f64| (1.0 - x / t).powf(1.0 / m);
    let (v_lo, v_hi) = (to_v(b), to_v(a));
    let f = |v: f64| {
        if v == 0.0 {
            return 0.0;
        }
        // (t v^m)^gamma * v^(m-1), combined so v^m may underflow harmlessly
        let w = t * v.powf(m);
        g(t - w) * t.powf(gamma) * v.powf(m * (gamma + 1.0) - 1.0) / alpha * t * m
    };
    let n = 200_000;
    let h = (v_hi - v_lo) / n as f64;
    let mut acc = f(v_lo) + f(v_hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(v_lo + h * i as f64);
    }
    acc * h / 3.0
}

fn rho_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

#[test]
fn oracle_reproduces_frozen_values() {
    let d = DensityF64::from_rho(1.0 / 3.0, 1.0).unwrap();
    assert_abs_diff_eq!(oracle_integral(&d, 0.0, 0.75, |_| 1.0), 0.5, epsilon = 1e-10);
    let line = DensityF64::from_rho(2.0 / 3.0, 1.0).unwrap();
    assert_abs_diff_eq!(oracle_integral(&line, 0.0, 1.0, |s| s), 1.0 / 3.0, epsilon = 1e-10);
}

#[test]
fn cdf_matches_oracle() {
    for rho in rho_grid() {
        let d = DensityF64::from_rho(rho, 2.0).unwrap();
        for s in [0.1, 0.5, 1.0, 1.7, 1.99] {
            let oracle = oracle_integral(&d, 0.0, s, |_| 1.0);
            assert_abs_diff_eq!(d.cdf(s).unwrap(), oracle, epsilon = 1e-9);
        }
    }
    let d = DensityF64::from_rho(1.0 / 3.0, 1.0).unwrap();
    assert_abs_diff_eq!(d.cdf(0.75).unwrap(), 0.5, epsilon = 1e-15);
}

#[test]
fn inverse_cdf_matches_bisection() {
    for rho in [0.2, 1.0 / 3.0, 0.5, 0.8] {
        let d = DensityF64::from_rho(rho, 1.0).unwrap();
        for u in [0.05, 0.3, 0.75, 0.95] {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if d.cdf(mid).unwrap() < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert_abs_diff_eq!(d.inverse_cdf(u).unwrap(), 0.5 * (lo + hi), epsilon = 1e-12);
        }
    }
    let d = DensityF64::from_rho(1.0 / 3.0, 1.0).unwrap();
    assert_abs_diff_eq!(d.inverse_cdf(0.75).unwrap(), 0.9375, epsilon = 1e-14);
}

#[test]
fn normalization_and_expectation_identity() {
    let spec = QuadratureSpec::default();
    for rho in rho_grid() {
        for t in [1.0, 2.5] {
            let d = DensityF64::from_rho(rho, t).unwrap();
            assert_abs_diff_eq!(d.normalization(&spec).unwrap(), 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(d.expected_remaining(&spec).unwrap(), rho * t, epsilon = 1e-6 * t);
            let oracle_mean = oracle_integral(&d, 0.0, t, |s| s);
            assert_abs_diff_eq!(oracle_mean, d.mean(), epsilon = 1e-8 * t);
        }
    }
}

#[test]
fn pay_matches_direct_expectation_oracle() {
    let spec = QuadratureSpec::default();
    for rho in [0.1, 0.35, 0.5, 0.65, 0.9] {
        let t = 1.5;
        let d = DensityF64::from_rho(rho, t).unwrap();
        for s in [0.0, 0.3, 0.75, 1.2, 1.5] {
            // expected payoff of s against t ~ den, split where the payoff row changes
            let below = oracle_integral(&d, 0.0, s, |x| t - x);
            let above = oracle_integral(&d, s, t, |_| rho * (t - s));
            let oracle = below + above;
            assert_abs_diff_eq!(d.pay_numeric(s, &spec).unwrap(), oracle, epsilon = 1e-8);
            assert_abs_diff_eq!(oracle, rho * t, epsilon = 1e-8);
        }
    }
}

#[test]
fn constant_pay_across_grid() {
    let spec = QuadratureSpec::default();
    for rho in rho_grid() {
        let d = DensityF64::from_rho(rho, 1.0).unwrap();
        let worst = (0..=10)
            .map(|i| (d.pay_numeric(i as f64 / 10.0, &spec).unwrap() - rho).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "rho {rho}: {worst:e}");
    }
}

#[test]
fn residuals_vanish_on_interior_grid() {
    for rho in rho_grid() {
        for t in [1.0, 2.0] {
            let d = DensityF64::from_rho(rho, t).unwrap();
            for i in 1..20 {
                let s = t * i as f64 / 20.0;
                let e2 = d.check_indifference(s).unwrap();
                let e3 = d.check_ode(s).unwrap();
                assert!(e2.analytic.abs() <= 1e-10, "indifference rho {rho} s {s}: {:e}", e2.analytic);
                assert!(e3.analytic.abs() <= 1e-10, "ode rho {rho} s {s}: {:e}", e3.analytic);
                assert!(e2.relative_fd() <= 1e-4, "indifference fd rho {rho} s {s}: {:e}", e2.relative_fd());
                assert!(e3.relative_fd() <= 1e-4, "ode fd rho {rho} s {s}: {:e}", e3.relative_fd());
            }
        }
    }
}

#[test]
fn residual_rejects_a_wrong_density() {
    // sanity check that the residuals can fail: perturb the exponent
    let d = DensityF64::from_rho(0.3, 1.0).unwrap();
    let gamma = d.gamma() + 0.1;
    let s: f64 = 0.4;
    let den = (1.0 - s).powf(gamma) / d.alpha();
    let dden = -gamma * (1.0 - s).powf(gamma - 1.0) / d.alpha();
    let r = 0.7 * (1.0 - s) * dden + (2.0 * 0.3 - 1.0) * den;
    assert!(r.abs() > 1e-3);
}

#[test]
fn shape_monotonicity() {
    let rhos = rho_grid();
    let gammas: Vec<f64> = rhos
        .iter()
        .map(|&r| DensityF64::from_rho(r, 1.0).unwrap().gamma())
        .collect();
    assert!(gammas.windows(2).all(|w| w[0] < w[1]));
    for &rho in &rhos {
        let d = DensityF64::from_rho(rho, 1.0).unwrap();
        let vals: Vec<f64> = (0..100).map(|i| d.den(i as f64 / 100.0).unwrap()).collect();
        let non_increasing = vals.windows(2).all(|w| w[1] <= w[0]);
        assert_eq!(non_increasing, rho >= 0.5, "rho {rho}");
    }
}

#[test]
fn roundtrip_strict_where_representable() {
    for rho in [0.3, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.8, 0.95] {
        let d = DensityF64::from_rho(rho, 1.0).unwrap();
        for k in 0..=1000 {
            let u = k as f64 / 1000.0;
            let back = d.cdf(d.inverse_cdf(u).unwrap()).unwrap();
            assert!((back - u).abs() <= 1e-12, "rho {rho} u {u}: {back}");
        }
    }
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

fn next_down(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

proptest! {
    /// The returned quantile is within one ulp of the exact one: `u` lies
    /// between the CDF at the neighbouring floats (to 1e-12).
    #[test]
    fn inverse_cdf_is_ulp_accurate(rho in 0.02f64..0.98, u in 0.0f64..=1.0, t in 0.5f64..4.0) {
        let d = DensityF64::from_rho(rho, t).unwrap();
        let s = d.inverse_cdf(u).unwrap();
        prop_assert!((0.0..=t).contains(&s));
        let back = d.cdf(s).unwrap();
        if (back - u).abs() > 1e-12 {
            let lo = d.cdf(next_down(s)).unwrap();
            let hi = d.cdf(next_up(s).min(t)).unwrap();
            prop_assert!(lo - 1e-12 <= u && u <= hi + 1e-12, "u {} s {} lo {} hi {}", u, s, lo, hi);
        }
    }

    #[test]
    fn cdf_is_monotone(rho in 0.02f64..0.98, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let d = DensityF64::from_rho(rho, 1.0).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(d.cdf(lo).unwrap() <= d.cdf(hi).unwrap());
    }
}
