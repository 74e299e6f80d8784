//! Brute-force references used to judge the accelerated engines.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::functions::AnalyticFunction;
use crate::sum::{ComplexNeumaier, Neumaier};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub imag: f64,
    pub n_used: usize,
    pub stability_gap: f64,
}

/// `e^{−2πik/N}` with `k` reduced to `[−N/2, N/2]`.
fn inverse_root(k: u64, count: u64) -> Complex64 {
    let n = count as f64;
    let k2 = if 2 * k > count { k as f64 - n } else { k as f64 };
    Complex64::from_polar(1.0, -2.0 * PI * k2 / n)
}

/// Conjugates of the nodes `e^{2πik/N}`.
pub(crate) fn inverse_roots(count: usize) -> Vec<Complex64> {
    (0..count as u64).into_par_iter().map(|k| inverse_root(k, count as u64)).collect()
}

const SPLIT: u64 = 1024;

/// `e^{−2πik/N}` as a product from two small tables, `k = SPLIT·hi + lo`.
struct PhaseTable {
    count: u64,
    hi: Vec<Complex64>,
    lo: Vec<Complex64>,
}

impl PhaseTable {
    fn new(count: u64) -> Self {
        let hi = (0..count.div_ceil(SPLIT)).map(|h| inverse_root(h * SPLIT, count)).collect();
        let lo = (0..SPLIT.min(count)).map(|l| inverse_root(l, count)).collect();
        PhaseTable { count, hi, lo }
    }

    #[inline]
    fn get(&self, k: u64) -> Complex64 {
        self.hi[(k / SPLIT) as usize] * self.lo[(k % SPLIT) as usize]
    }
}

/// `(1/N)Σ g(z_k) z_k^{−n}` on `|z| = r` with exact integer phase reduction.
pub(crate) fn circle_coefficient(values: &[Complex64], n: u64, r: f64) -> Complex64 {
    let count = values.len() as u64;
    let table = PhaseTable::new(count);
    let s = phase_sum(values, &table, n % count, 0, values.len());
    s * (r.powf(-(n as f64)) / count as f64)
}

/// Pairwise sum of `values[k]·e^{−2πi·step·k/N}` over `lo..hi`, compensated at the leaves.
fn phase_sum(values: &[Complex64], table: &PhaseTable, step: u64, lo: usize, hi: usize) -> Complex64 {
    const LEAF: usize = 256;
    if hi - lo > LEAF {
        let mid = lo + (hi - lo) / 2;
        return phase_sum(values, table, step, lo, mid) + phase_sum(values, table, step, mid, hi);
    }
    let count = table.count;
    let mut idx = (step * lo as u64) % count;
    let mut acc = ComplexNeumaier::new();
    for v in &values[lo..hi] {
        acc.add(*v * table.get(idx));
        idx += step;
        if idx >= count {
            idx -= count;
        }
    }
    acc.total()
}

fn circle_values(u: &AnalyticFunction, r: f64, count: usize) -> Vec<Complex64> {
    let n = count as f64;
    (0..count)
        .into_par_iter()
        .map(|k| {
            let k2 = if 2 * k > count { k as f64 - n } else { k as f64 };
            u.eval(Complex64::from_polar(r, 2.0 * PI * k2 / n))
        })
        .collect()
}

/// Trapezoid rule on `|z| = r`, doubling N from 2¹⁰ until successive values differ by less than `eps`.
pub fn trapezoid_oracle(u: &AnalyticFunction, n: u32, r: f64, eps: f64) -> Result<OracleResult> {
    let d = &u.descriptor;
    if !(r > d.a_minus && r < d.a_plus) {
        return Err(Error::Domain(format!("radius {r} outside the annulus ({}, {})", d.a_minus, d.a_plus)));
    }
    if n as f64 * (1.0 / r).ln() > 700.0 {
        return Err(Error::Overflow("r^-n overflows".into()));
    }
    let mut count = 1usize << 10;
    let mut prev: Option<Complex64> = None;
    let mut gap = f64::INFINITY;
    loop {
        let vals = circle_values(u, r, count);
        if let Some(i) = vals.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain(format!("transform not finite at node {i} of {count}")));
        }
        let v = circle_coefficient(&vals, n as u64, r);
        if let Some(p) = prev {
            gap = (v - p).norm();
            if gap < eps {
                return Ok(OracleResult { value: v.re, imag: v.im, n_used: count, stability_gap: gap });
            }
        }
        prev = Some(v);
        count *= 2;
        if count > 1 << 22 {
            return Err(Error::NonConvergence(format!(
                "trapezoid oracle stalled with gap {gap:e} at N = {}",
                count / 2
            )));
        }
    }
}

fn binomial_coeffs(a: f64, m: f64, sign: f64, len: usize) -> Vec<f64> {
    // (a + sign·w)^m = a^m Σ C(m,k) (sign/a)^k w^k
    let mut c = Vec::with_capacity(len);
    let mut t = a.powf(m);
    for k in 0..len {
        c.push(t);
        t *= (m - k as f64) / (k as f64 + 1.0) * sign / a;
    }
    c
}

fn finite_support(m: f64) -> Option<usize> {
    (m >= 0.0 && m == m.round()).then(|| m as usize + 1)
}

/// Coefficients of `(a₊ − w)^{m₊}(a₋ + w)^{m₋}` in `w = 1/z`, i.e. `h[0..=n_max]`.
pub fn binomial_series_h(a_plus: f64, a_minus: f64, m_plus: f64, m_minus: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(a_plus > 1.0 && a_minus > 1.0) {
        return Err(Error::param("a_plus", "both radii must exceed 1"));
    }
    let len = n_max + 1;
    let p = binomial_coeffs(a_plus, m_plus, -1.0, len);
    let q = binomial_coeffs(a_minus, m_minus, 1.0, len);
    let h = (0..len)
        .into_par_iter()
        .map(|n| {
            let mut acc = Neumaier::new();
            match (finite_support(m_plus), finite_support(m_minus)) {
                (Some(sp), _) => (0..sp.min(n + 1)).for_each(|k| acc.add(p[k] * q[n - k])),
                (None, Some(sq)) => (0..sq.min(n + 1)).for_each(|k| acc.add(q[k] * p[n - k])),
                (None, None) => (0..=n).for_each(|k| acc.add(p[k] * q[n - k])),
            }
            acc.total()
        })
        .collect();
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::AnalyticityDescriptor;

    #[test]
    fn geometric_coefficient() {
        let u = AnalyticFunction::new(
            "1/(2-z)",
            |z: Complex64| 1.0 / (2.0 - z),
            AnalyticityDescriptor::annulus(0.0, 2.0).unwrap(),
            true,
        );
        let o = trapezoid_oracle(&u, 7, 1.0, 1e-17).unwrap();
        assert!((o.value - 0.00390625).abs() < 1e-16, "{o:?}");
    }

    #[test]
    fn binomial_small_cases() {
        let h = binomial_series_h(1.5, 2.0, 1.0, 0.0, 5).unwrap();
        assert_eq!(&h[..3], &[1.5, -1.0, 0.0]);
        assert!(h[3..].iter().all(|&x| x == 0.0));
        let a = 1.25;
        let h = binomial_series_h(3.0, a, 0.0, -1.0, 10).unwrap();
        for (n, v) in h.iter().enumerate() {
            let e = (-1.0f64 / a).powi(n as i32) / a;
            assert!((v - e).abs() <= 1e-15 * e.abs(), "{n}");
        }
    }

    #[test]
    fn binomial_general_power() {
        // (a-w)^{1/2}(a+w)^{1/2} = (a²-w²)^{1/2}: odd coefficients vanish
        let h = binomial_series_h(2.0, 2.0, 0.5, 0.5, 9).unwrap();
        for n in (1..10).step_by(2) {
            assert!(h[n].abs() < 1e-15);
        }
        assert!((h[0] - 2.0).abs() < 1e-15);
        assert!((h[2] + 0.25).abs() < 1e-15);
    }
}
