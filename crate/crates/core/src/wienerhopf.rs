//! Wiener-Hopf factorization `PSD = H₊H₋` on the unit circle and causal impulse responses.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::contours::{fitted_contour, SinhContour};
use crate::error::{Condition, Error, Result};
use crate::functions::{principal_pow, Evaluator};
use crate::invz::{step_from_hardy, truncation_lambda, QuadratureGrid};
use crate::oracle::{circle_coefficient, inverse_roots};
use crate::sum::ComplexNeumaier;

/// Power spectral density with the constants of its factorization condition.
#[derive(Clone)]
pub struct PsdSpec {
    pub name: String,
    pub evaluator: Evaluator,
    pub a: f64,
    pub gamma: f64,
    pub m_plus: f64,
    pub m_minus: f64,
    pub c_inf: f64,
    pub delta: f64,
}

impl fmt::Debug for PsdSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsdSpec")
            .field("name", &self.name)
            .field("a", &self.a)
            .field("gamma", &self.gamma)
            .field("m_plus", &self.m_plus)
            .field("m_minus", &self.m_minus)
            .field("c_inf", &self.c_inf)
            .field("delta", &self.delta)
            .finish()
    }
}

impl PsdSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        evaluator: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        a: f64,
        gamma: f64,
        m_plus: f64,
        m_minus: f64,
        c_inf: f64,
        delta: f64,
    ) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::param("a", format!("must exceed 1, got {a}")));
        }
        if !(gamma > 0.0 && gamma <= PI / 2.0) {
            return Err(Error::param("gamma", format!("must lie in (0, pi/2], got {gamma}")));
        }
        if !(c_inf > 0.0) {
            return Err(Error::param("c_inf", format!("must be positive, got {c_inf}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::param("delta", format!("must lie in (0, 1], got {delta}")));
        }
        let psd =
            PsdSpec { name: name.into(), evaluator: Arc::new(evaluator), a, gamma, m_plus, m_minus, c_inf, delta };
        for k in 0..64 {
            let z = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / 64.0);
            let v = psd.eval(z);
            if !(v.re > 0.0) || v.im.abs() > 1e-10 * v.re {
                return Err(Error::condition(Condition::WhfSinh3, format!("PSD({z}) = {v} is not positive")));
            }
            if (psd.eval(1.0 / z) - v).norm() > 1e-10 * v.norm() {
                return Err(Error::condition(Condition::WhfSinh3, "PSD(1/z) != PSD(z)"));
            }
        }
        Ok(psd)
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.evaluator)(z)
    }

    pub fn m(&self) -> f64 {
        self.m_plus + self.m_minus
    }
}

/// `base^m`, branch-free for integer m, principal otherwise.
fn factor_pow(base: Complex64, m: f64) -> Result<Complex64> {
    if m == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if m == m.round() && m.abs() < 64.0 {
        return Ok(base.powi(m as i32));
    }
    let v = principal_pow(base, m);
    if v.re.is_nan() {
        return Err(Error::Domain(format!("base {base} of a fractional power lies on the branch cut")));
    }
    Ok(v)
}

/// `(PSD(z)·a^m/c∞) / ((a−z)^{m₊}(a−1/z)^{m₊}(a+z)^{m₋}(a+1/z)^{m₋})`.
pub fn regularized_a(psd: &PsdSpec, z: Complex64) -> Result<Complex64> {
    let a = psd.a;
    let iz = 1.0 / z;
    let den = factor_pow(a - z, psd.m_plus)?
        * factor_pow(a - iz, psd.m_plus)?
        * factor_pow(a + z, psd.m_minus)?
        * factor_pow(a + iz, psd.m_minus)?;
    Ok(psd.eval(z) * (a.powf(psd.m()) / psd.c_inf) / den)
}

/// Principal `ln A` along an ordered node sequence, failing if consecutive values jump by more than π.
fn ln_a_along(psd: &PsdSpec, nodes: impl Iterator<Item = Complex64>) -> Result<Vec<Complex64>> {
    let mut out: Vec<Complex64> = Vec::new();
    for z in nodes {
        let v = regularized_a(psd, z)?;
        if !(v.re.is_finite() && v.im.is_finite()) || v == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain(format!("A({z}) = {v}")));
        }
        let l = v.ln();
        if let Some(prev) = out.last() {
            if (l.im - prev.im).abs() > PI {
                return Err(Error::Winding(format!("ln A jumps from {} to {} near {z}", prev.im, l.im)));
            }
        }
        out.push(l);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DMethod {
    CircleTrapezoid,
    Sinh,
}

/// Knobs of the factorization pipeline; `None` means "derive".
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOptions {
    pub eps: f64,
    pub k_d: f64,
    pub r_plus: Option<f64>,
    pub zeta: Option<f64>,
    pub zeta_inner: Option<f64>,
    pub n_half: Option<usize>,
    pub n_half_inner: Option<usize>,
    pub d_method: Option<DMethod>,
    pub circle_nodes: Option<usize>,
}

impl Default for FilterOptions {
    fn default() -> Self {
        FilterOptions {
            eps: 1e-15,
            k_d: 0.9,
            r_plus: None,
            zeta: None,
            zeta_inner: None,
            n_half: None,
            n_half_inner: None,
            d_method: None,
            circle_nodes: None,
        }
    }
}

/// Immutable factorization data: the constant d, c±, the inner grid with cached `ln A(±χ¹)`,
/// the outer grid and `A₋` at the outer nodes `±χ`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub psd: PsdSpec,
    pub contour: SinhContour,
    pub d: f64,
    pub c_plus: f64,
    pub c_minus: f64,
    pub inner_grid: QuadratureGrid,
    pub outer_grid: QuadratureGrid,
    ln_a_plus: Vec<Complex64>,
    ln_a_minus: Vec<Complex64>,
    /// `b·cosh(iω+y)/χ` on the inner grid.
    inner_w: Vec<Complex64>,
    pub a_minus_outer_plus: Vec<Complex64>,
    pub a_minus_outer_minus: Vec<Complex64>,
}

/// `b·cosh(iω+y)` from the stored Jacobian `i·b·cosh(iω+y)`.
#[inline]
fn real_weight(w: Complex64) -> Complex64 {
    Complex64::new(w.im, -w.re)
}

/// Number of circle nodes needed for `d` at annulus radius `a`.
fn circle_nodes_for(a: f64) -> usize {
    ((40.0 / a.ln()).ceil() as usize).next_power_of_two().max(1024)
}

pub fn compute_d(psd: &PsdSpec, method: DMethod) -> Result<f64> {
    match method {
        DMethod::CircleTrapezoid => compute_d_circle(psd, circle_nodes_for(psd.a)),
        DMethod::Sinh => {
            let n = psd.m().max(0.0).floor() as u32 + 1;
            let o = FilterOptions { d_method: Some(DMethod::Sinh), ..Default::default() };
            Ok(Factorization::new(psd, n, n, &o)?.d)
        }
    }
}

/// `d = −mean ln A` over `count` points of the unit circle.
pub fn compute_d_circle(psd: &PsdSpec, count: usize) -> Result<f64> {
    let n = count as f64;
    let ln = ln_a_along(psd, (0..count).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n)))?;
    let mut acc = ComplexNeumaier::new();
    for l in &ln {
        acc.add(*l);
    }
    let d = -acc.total() / n;
    if d.im.abs() > 1e-10 {
        return Err(Error::NonConvergence(format!("d has imaginary part {}", d.im)));
    }
    Ok(d.re)
}

impl Factorization {
    /// Steps I-VI of the pipeline for responses `h[n]`, `n ∈ [n_lo, n_hi]`.
    pub fn new(psd: &PsdSpec, n_lo: u32, n_hi: u32, o: &FilterOptions) -> Result<Self> {
        let a = psd.a;
        let m = psd.m();
        if !(n_lo as f64 > m) {
            return Err(Error::param("n_lo", format!("must exceed m+ + m- = {m}, got {n_lo}")));
        }
        if n_lo > n_hi {
            return Err(Error::param("n_hi", format!("empty range [{n_lo}, {n_hi}]")));
        }
        if !(o.eps > 0.0 && o.eps < 1.0) {
            return Err(Error::param("eps", format!("must lie in (0,1), got {}", o.eps)));
        }
        let r_minus = 1.0;
        let r_plus = o.r_plus.unwrap_or(1.0 + 0.5 * (a - 1.0));
        if !(r_plus > 1.0 && r_plus < a) {
            return Err(Error::param("r_plus", format!("must lie in (1, {a}), got {r_plus}")));
        }
        let omega = -psd.gamma / 2.0;
        let d_half = o.k_d * psd.gamma / 2.0;
        let contour = fitted_contour(r_minus, r_plus, omega, d_half)?;

        // outer grid: Hardy bound from n_hi, truncation from n_lo
        let hardy = (r_minus.powf(-(n_hi as f64)) + 10.0) / (a - r_plus).powi(2);
        let lambda = truncation_lambda(n_lo as f64 - m, 1.0, &contour, o.eps, 1.0)?;
        let (zeta, n_half) = match (o.zeta, o.n_half) {
            (Some(z), Some(n)) => (z, n),
            (Some(z), None) => (z, (lambda / z).ceil() as usize),
            (None, Some(n)) => (lambda / n as f64, n),
            (None, None) => {
                let z = step_from_hardy(d_half, hardy, o.eps)?;
                (z, (lambda / z).ceil() as usize)
            }
        };
        let lambda1 = truncation_lambda(1.0 + 0.9 * psd.delta, 1.0, &contour, o.eps, 1.0)?;
        let (zeta1, n_half1) = match (o.zeta_inner, o.n_half_inner) {
            (Some(z), Some(n)) => (z, n),
            (Some(z), None) => (z, (lambda1 / z).ceil() as usize),
            (None, Some(n)) => (lambda1 / n as f64, n),
            (None, None) => (zeta, (lambda1 / zeta).ceil() as usize),
        };
        let inner_grid = QuadratureGrid::for_sinh(&contour, zeta1, n_half1, false);
        let outer_grid = QuadratureGrid::for_sinh(&contour, zeta, n_half, false);

        let chi1 = &inner_grid.nodes;
        let ln_a_plus = ln_a_along(psd, chi1.iter().copied())?;
        let ln_a_minus = ln_a_along(psd, chi1.iter().map(|z| -z))?;
        let inner_w: Vec<Complex64> = inner_grid.weights.iter().zip(chi1).map(|(w, z)| real_weight(*w) / z).collect();

        let d_method = o.d_method.unwrap_or(if a - 1.0 < 0.01 { DMethod::Sinh } else { DMethod::CircleTrapezoid });
        let d = match d_method {
            DMethod::Sinh => {
                let mut acc = ComplexNeumaier::new();
                for j in 0..chi1.len() {
                    acc.add((ln_a_plus[j] + ln_a_minus[j]) * inner_w[j]);
                }
                -(zeta1 / (2.0 * PI)) * acc.total().re
            }
            DMethod::CircleTrapezoid => compute_d_circle(psd, o.circle_nodes.unwrap_or_else(|| circle_nodes_for(a)))?,
        };
        let base = psd.c_inf.sqrt() * a.powf(-m / 2.0);
        let mut f = Factorization {
            psd: psd.clone(),
            contour,
            d,
            c_plus: base * (d / 2.0).exp(),
            c_minus: base * (-d / 2.0).exp(),
            inner_grid,
            outer_grid,
            ln_a_plus,
            ln_a_minus,
            inner_w,
            a_minus_outer_plus: Vec::new(),
            a_minus_outer_minus: Vec::new(),
        };
        let outer = f.outer_grid.nodes.clone();
        let (plus, minus): (Vec<_>, Vec<_>) =
            outer.par_iter().map(|&z| (f.ln_a_minus_raw(z).exp(), f.ln_a_minus_raw(-z).exp())).unzip();
        f.a_minus_outer_plus = plus;
        f.a_minus_outer_minus = minus;
        Ok(f)
    }

    /// Kernel sum for `ln A₋(z)` without any region check.
    fn ln_a_minus_raw(&self, z: Complex64) -> Complex64 {
        let chi1 = &self.inner_grid.nodes;
        let mut acc = ComplexNeumaier::new();
        for (j, &c) in chi1.iter().enumerate() {
            let s = z * c;
            acc.add(self.inner_w[j] * (self.ln_a_plus[j] / (s - 1.0) - self.ln_a_minus[j] / (s + 1.0)));
        }
        acc.total() * (self.inner_grid.zeta / (2.0 * PI))
    }

    /// Whether `w` lies strictly to the right of the contour.
    fn right_of_contour(&self, w: Complex64) -> bool {
        let c = &self.contour;
        let y = (w.im / (c.b * c.omega.cos())).asinh();
        w.re > c.sigma - c.b * c.omega.sin() * y.cosh()
    }

    /// Outside the loops `1/L` and `−1/L`, where the contour formula for `ln A₋` holds.
    pub fn in_minus_region(&self, z: Complex64) -> bool {
        if z.norm() < 1e-300 {
            return false;
        }
        let iz = 1.0 / z;
        !self.right_of_contour(iz) && !self.right_of_contour(-iz)
    }

    pub fn ln_a_minus(&self, z: Complex64) -> Result<Complex64> {
        if !self.in_minus_region(z) {
            return Err(Error::Domain(format!("{z} lies inside a reflected contour loop")));
        }
        let v = self.ln_a_minus_raw(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Domain(format!("{z} lies on the contour")));
        }
        Ok(v)
    }

    fn h_minus_direct(&self, z: Complex64) -> Result<Complex64> {
        let p = &self.psd;
        let iz = 1.0 / z;
        Ok(self.c_minus
            * factor_pow(p.a - iz, p.m_plus)?
            * factor_pow(p.a + iz, p.m_minus)?
            * self.ln_a_minus(z)?.exp())
    }

    /// `(H₊(z), H₋(z))`; `H₊` from `PSD/H₋` where the contour formula applies, else from `H₋(1/z)`.
    pub fn h_factors(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let psd = self.psd.eval(z);
        if self.in_minus_region(z) {
            let hm = self.h_minus_direct(z)?;
            Ok((psd / hm, hm))
        } else if self.in_minus_region(1.0 / z) {
            let hp = self.h_minus_direct(1.0 / z)?;
            Ok((hp, psd / hp))
        } else {
            Err(Error::Domain(format!("{z} is outside the factorization region")))
        }
    }

    /// `A₋(z)` and `A₊(z) = A(z)/A₋(z)`.
    pub fn a_factors(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let am = self.ln_a_minus(z)?.exp();
        Ok((regularized_a(&self.psd, z)? / am, am))
    }
}

pub fn h_factors(f: &Factorization, z: Complex64) -> Result<(Complex64, Complex64)> {
    f.h_factors(z)
}

#[derive(Debug, Clone)]
pub struct ImpulseResponse {
    pub n_lo: u32,
    pub h: Vec<f64>,
    /// Largest `|Im h[n]|` discarded.
    pub max_imag: f64,
    pub outer_nodes: usize,
    pub inner_nodes: usize,
    pub factorization: Factorization,
}

/// `h[n]` for `n ∈ [n_lo, n_hi]` with derived grids.
pub fn impulse_response(psd: &PsdSpec, n_lo: u32, n_hi: u32, eps: f64) -> Result<ImpulseResponse> {
    impulse_response_with(psd, n_lo, n_hi, &FilterOptions { eps, ..Default::default() })
}

pub fn impulse_response_with(psd: &PsdSpec, n_lo: u32, n_hi: u32, o: &FilterOptions) -> Result<ImpulseResponse> {
    let f = Factorization::new(psd, n_lo, n_hi, o)?;
    let p = &f.psd;
    let (a, m) = (p.a, p.m());
    let scale = (f.d / 2.0).exp() * p.c_inf.powf(-0.5) * a.powf(m / 2.0);
    let chi = &f.outer_grid.nodes;
    let mut up = Vec::with_capacity(chi.len());
    let mut um = Vec::with_capacity(chi.len());
    for (k, &z) in chi.iter().enumerate() {
        let iz = 1.0 / z;
        up.push(
            scale * p.eval(z) / f.a_minus_outer_plus[k]
                * factor_pow(a - iz, -p.m_plus)?
                * factor_pow(a + iz, -p.m_minus)?,
        );
        um.push(
            scale * p.eval(-z) / f.a_minus_outer_minus[k]
                * factor_pow(a + iz, -p.m_plus)?
                * factor_pow(a - iz, -p.m_minus)?,
        );
    }
    if let Some(k) = up.iter().chain(&um).position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Domain(format!("transform not finite at outer node {}", k % chi.len())));
    }
    let der: Vec<Complex64> = f.outer_grid.weights.iter().map(|w| real_weight(*w)).collect();
    let lz: Vec<Complex64> = chi.iter().map(|z| z.ln()).collect();
    let zeta = f.outer_grid.zeta;
    let vals: Vec<Complex64> = (n_lo..=n_hi)
        .into_par_iter()
        .map(|n| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let e = -(n as f64 + 1.0);
            let mut acc = ComplexNeumaier::new();
            for k in 0..chi.len() {
                acc.add(der[k] * (lz[k] * e).exp() * (up[k] + sign * um[k]));
            }
            acc.total() * (zeta / (2.0 * PI))
        })
        .collect();
    let max_imag = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    Ok(ImpulseResponse {
        n_lo,
        h: vals.iter().map(|v| v.re).collect(),
        max_imag,
        outer_nodes: f.outer_grid.n_half,
        inner_nodes: f.inner_grid.n_half,
        factorization: f,
    })
}

/// Trapezoid rule for `h[n] = (1/2πi)∮_{|z|=r} H(1/z) z^{−n−1} dz` with `N` nodes.
pub fn reference_impulse_response(
    h_explicit: impl Fn(Complex64) -> Complex64 + Sync,
    n_lo: u32,
    n_hi: u32,
    r: f64,
    count: usize,
) -> Result<Vec<f64>> {
    if n_hi as f64 * (1.0 / r).ln() > 700.0 {
        return Err(Error::Overflow("r^-n overflows".into()));
    }
    if count == 0 || n_lo > n_hi {
        return Err(Error::param("count", "need N >= 1 and n_lo <= n_hi"));
    }
    let roots = inverse_roots(count);
    // conj of the inverse roots are the nodes
    let vals: Vec<Complex64> = roots.par_iter().map(|w| h_explicit(1.0 / (r * w.conj()))).collect();
    Ok((n_lo..=n_hi).into_par_iter().map(|n| circle_coefficient(&vals, n as u64, r).re).collect())
}

/// Rational PSD `(a₊−z)^{m₊}(a₊−1/z)^{m₊}(a₋+z)^{m₋}(a₋+1/z)^{m₋}` and its causal factor
/// `H(z) = (a₊−1/z)^{m₊}(a₋+1/z)^{m₋}`.
pub fn rational_psd(a_plus: f64, a_minus: f64, m_plus: f64, m_minus: f64) -> Result<(PsdSpec, Evaluator)> {
    if !(a_plus > 1.0 && a_minus > 1.0) {
        return Err(Error::param("a_plus", format!("both radii must exceed 1, got {a_plus}, {a_minus}")));
    }
    let pw = move |b: Complex64, m: f64| factor_pow(b, m).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
    let eval = move |z: Complex64| {
        let iz = 1.0 / z;
        pw(a_plus - z, m_plus) * pw(a_plus - iz, m_plus) * pw(a_minus + z, m_minus) * pw(a_minus + iz, m_minus)
    };
    // A(∞) = 1 needs c∞ = a₊^{m₊}a₋^{m₋}
    let c_inf = a_plus.powf(m_plus) * a_minus.powf(m_minus);
    let name = format!("rational(a+={a_plus}, a-={a_minus}, m+={m_plus}, m-={m_minus})");
    let psd = PsdSpec::new(name, eval, a_plus.min(a_minus), PI / 2.0, m_plus, m_minus, c_inf, 1.0)?;
    let h = Arc::new(move |z: Complex64| {
        let iz = 1.0 / z;
        pw(a_plus - iz, m_plus) * pw(a_minus + iz, m_minus)
    });
    Ok((psd, h))
}
