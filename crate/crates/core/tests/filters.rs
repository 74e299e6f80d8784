//! Spectral factorization and impulse responses of rational densities.

use num_complex::Complex64;
use std::f64::consts::PI;
use zsinh::cases::{self, filter_cases, filter_narrow};
use zsinh::oracle::binomial_series_h;
use zsinh::wienerhopf::{
    compute_d, compute_d_circle, impulse_response, impulse_response_with, rational_psd, reference_impulse_response,
    DMethod, Factorization, FilterOptions,
};

fn factorization(case: &cases::FilterCase) -> Factorization {
    let (psd, _) = rational_psd(case.a_plus, case.a_minus, case.m_plus, case.m_minus).unwrap();
    Factorization::new(&psd, case.n_lo, case.n_hi, &case.options()).unwrap()
}

/// 100 points on the unit circle and 100 on the outer contour and its mirror image.
fn sample_points(f: &Factorization) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> =
        (0..100).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.3) / 100.0)).collect();
    let nodes = &f.outer_grid.nodes;
    let step = (nodes.len() / 50).max(1);
    for z in nodes.iter().step_by(step).take(50) {
        pts.push(*z);
        pts.push(-*z);
    }
    pts
}

#[test]
fn factors_multiply_to_density() {
    for case in filter_cases() {
        let f = factorization(&case);
        let pts = sample_points(&f);
        assert!(pts.len() >= 200);
        for z in pts {
            let (hp, hm) = f.h_factors(z).unwrap();
            let psd = f.psd.eval(z);
            assert!((hp * hm / psd - 1.0).norm() <= 1e-12, "{} at {z}", case.name);
        }
    }
}

#[test]
fn reciprocal_symmetry() {
    for case in filter_cases() {
        let f = factorization(&case);
        for k in 0..100 {
            let z = Complex64::from_polar(
                1.0 + 0.5 * (f.psd.a - 1.0) * (k % 3) as f64 / 2.0,
                2.0 * PI * (k as f64 + 0.1) / 100.0,
            );
            let (hp, _) = f.h_factors(z).unwrap();
            let (_, hm_inv) = f.h_factors(1.0 / z).unwrap();
            assert!((hm_inv - hp).norm() <= 1e-12 * hp.norm(), "{} at {z}", case.name);
        }
    }
}

#[test]
fn minus_factor_matches_transfer_function() {
    for case in filter_cases() {
        let (psd, h) = rational_psd(case.a_plus, case.a_minus, case.m_plus, case.m_minus).unwrap();
        let f = Factorization::new(&psd, case.n_lo, case.n_hi, &case.options()).unwrap();
        for k in 0..100 {
            let z = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / 100.0);
            let (_, hm) = f.h_factors(z).unwrap();
            let exact = h(z);
            assert!((hm - exact).norm() <= 1e-12 * exact.norm(), "{} at {z}", case.name);
        }
    }
}

#[test]
fn regularized_factor_tends_to_one() {
    let f = factorization(&filter_narrow());
    let delta_prime = 0.9 * f.psd.delta;
    let gamma = f.psd.gamma;
    for arg in [PI / 2.0 - 0.5 * gamma, PI / 2.0, 3.0 * PI / 4.0, PI] {
        let mut c_max: f64 = 0.0;
        for r in [1e2, 1e3, 1e4] {
            let z = Complex64::from_polar(r, arg);
            let (_, am) = f.a_factors(z).unwrap();
            let dev = (am - 1.0).norm();
            c_max = c_max.max(dev * r.powf(delta_prime));
            assert!(dev < 1.0 / r.sqrt(), "arg {arg} r {r}: {dev:e}");
        }
        // one constant C serves all three radii
        for r in [1e2, 1e3, 1e4] {
            let (_, am) = f.a_factors(Complex64::from_polar(r, arg)).unwrap();
            assert!((am - 1.0).norm() <= c_max * r.powf(-delta_prime) * (1.0 + 1e-12));
        }
        assert!(c_max < 10.0, "arg {arg}: C = {c_max}");
    }
}

#[test]
fn d_agrees_between_circle_and_sinh() {
    for case in filter_cases() {
        let (psd, _) = rational_psd(case.a_plus, case.a_minus, case.m_plus, case.m_minus).unwrap();
        let ds = compute_d(&psd, DMethod::Sinh).unwrap();
        let dc = compute_d(&psd, DMethod::CircleTrapezoid).unwrap();
        // for these densities d = (m₊+m₋)·ln a − m₊ ln a₊ − m₋ ln a₋
        let exact = (case.m_plus + case.m_minus) * case.a_plus.min(case.a_minus).ln()
            - case.m_plus * case.a_plus.ln()
            - case.m_minus * case.a_minus.ln();
        assert!((ds - dc).abs() <= 1e-12, "{}: {ds:e} vs {dc:e}", case.name);
        assert!((ds - exact).abs() <= 1e-12, "{}: {ds:e} vs {exact:e}", case.name);
    }
}

#[test]
fn circle_d_converges_with_nodes() {
    let (psd, _) = rational_psd(1.3, 1.5, 3.0, -1.0).unwrap();
    let exact = 2.0 * 1.3f64.ln() - 3.0 * 1.3f64.ln() + 1.5f64.ln();
    let coarse = (compute_d_circle(&psd, 64).unwrap() - exact).abs();
    let fine = (compute_d_circle(&psd, 256).unwrap() - exact).abs();
    assert!(fine < 1e-14 && fine <= coarse);
}

#[test]
fn responses_are_real_and_accurate() {
    for case in filter_cases() {
        let (psd, _) = rational_psd(case.a_plus, case.a_minus, case.m_plus, case.m_minus).unwrap();
        let resp = impulse_response_with(&psd, case.n_lo, case.n_hi, &case.options()).unwrap();
        let hmax = resp.h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(resp.max_imag <= 1e-12 * hmax, "{}", case.name);
        let exact =
            binomial_series_h(case.a_plus, case.a_minus, case.m_plus, case.m_minus, case.n_hi as usize).unwrap();
        for (i, v) in resp.h.iter().enumerate() {
            let e = exact[case.n_lo as usize + i];
            assert!(((v - e) / e).abs() <= case.tolerance, "{} n={}", case.name, case.n_lo as usize + i);
        }
    }
}

#[test]
fn derived_grids_are_accurate() {
    let c = filter_narrow();
    let (psd, _) = rational_psd(c.a_plus, c.a_minus, c.m_plus, c.m_minus).unwrap();
    let resp = impulse_response(&psd, 100, 400, 1e-15).unwrap();
    let exact = binomial_series_h(c.a_plus, c.a_minus, c.m_plus, c.m_minus, 400).unwrap();
    let err = resp.h.iter().enumerate().map(|(i, v)| ((v - exact[100 + i]) / exact[100 + i]).abs()).fold(0.0, f64::max);
    assert!(err < 1e-13, "{err:e}");
}

#[test]
fn low_n_and_bad_density_are_rejected() {
    let (psd, _) = rational_psd(1.0001, 1.00015, 3.0, -1.0).unwrap();
    assert_eq!(impulse_response(&psd, 2, 10, 1e-15).unwrap_err().exit_code(), 2);
    assert!(rational_psd(1.0, 1.2, 1.0, 1.0).is_err());
    let o = FilterOptions { r_plus: Some(1.5), ..Default::default() };
    assert!(impulse_response_with(&psd, 100, 110, &o).is_err());
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max)
}

#[test]
fn series_matches_partial_fractions() {
    // m± = −1: H(1/z) = (1/(a₊ + a₋))·(1/(a₊ − z) + 1/(a₋ + z))
    let c = cases::filter_double_pole();
    let s = binomial_series_h(c.a_plus, c.a_minus, -1.0, -1.0, 400).unwrap();
    for n in 0..=400i32 {
        let alt = if n % 2 == 0 { 1.0 } else { -1.0 };
        let e = (c.a_plus.powi(-n - 1) + alt * c.a_minus.powi(-n - 1)) / (c.a_plus + c.a_minus);
        assert!(((s[n as usize] - e) / e).abs() < 1e-11, "n={n}");
        // a length-n convolution: O(nε) absolute
        assert!((s[n as usize] - e).abs() < 4.0 * (n + 1) as f64 * f64::EPSILON, "n={n}");
    }
}

#[test]
fn series_and_circle_references_agree() {
    let mut failures = Vec::new();
    for case in filter_cases() {
        let (_, h) = rational_psd(case.a_plus, case.a_minus, case.m_plus, case.m_minus).unwrap();
        let series = binomial_series_h(case.a_plus, case.a_minus, case.m_plus, case.m_minus, 400).unwrap();
        // enough nodes that aliasing, a^{−N}, is far below 1e-12
        let nodes = ((35.0 / case.a_plus.min(case.a_minus).ln()) as usize) | 1;
        let circle = reference_impulse_response(|z| h(z), 100, 400, 1.0, nodes.max(800_001)).unwrap();
        let err = max_rel(&circle, &series[100..]);
        if err > 1e-12 {
            failures.push(format!("{}: {err:e}", case.name));
        }
    }
    assert!(failures.is_empty(), "max relative disagreement above 1e-12: {failures:?}");
}

#[test]
fn coarse_circle_reference_error() {
    let c = filter_narrow();
    let (_, h) = rational_psd(c.a_plus, c.a_minus, c.m_plus, c.m_minus).unwrap();
    let fine = reference_impulse_response(|z| h(z), 100, 400, 1.0, 800_001).unwrap();
    let coarse = reference_impulse_response(|z| h(z), 100, 400, 1.0, 80_001).unwrap();
    let err = max_rel(&coarse, &fine);
    // aliasing of the pole at −a₋: about a₋^{−80001}·(growth of h) ≈ 8e-6
    assert!(err > 4e-6 && err < 1.6e-5, "{err:e}");
    let finer = reference_impulse_response(|z| h(z), 100, 400, 1.0, 1_600_001).unwrap();
    assert!(max_rel(&finer, &fine) <= 1e-12);
}

#[test]
fn autocovariance_from_impulse_response() {
    // Σ h[n]h[n+k] is the k-th Laurent coefficient of the density
    let c = filter_narrow();
    let (psd, _) = rational_psd(c.a_plus, c.a_minus, c.m_plus, c.m_minus).unwrap();
    let n_big = 1_000_000;
    let h = binomial_series_h(c.a_plus, c.a_minus, c.m_plus, c.m_minus, n_big + 2).unwrap();
    let count = 1 << 20;
    let vals: Vec<Complex64> =
        (0..count).map(|j| psd.eval(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / count as f64))).collect();
    for k in 0..3usize {
        let conv: f64 = {
            let mut acc = zsinh::sum::Neumaier::new();
            for n in 0..=n_big {
                acc.add(h[n] * h[n + k]);
            }
            acc.total()
        };
        let coef = zsinh::sum::compensated_sum(
            vals.iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / count as f64)),
        ) / count as f64;
        assert!(((conv - coef.re) / coef.re).abs() < 1e-8, "k={k}: {conv} vs {coef}");
    }
}
