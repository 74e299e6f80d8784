//! Inverse Z-transform engines: trapezoid on a circle, sinh-deformed contours (I, II, III) and
//! the log-deformed contour.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::contours::{
    admissible_rpm, arc_length_inside_unit_disc, fit_log_to_interval, fitted_contour, small_angle_params, LogContour,
    SinhContour,
};
use crate::error::{Condition, Error, Result};
use crate::functions::{AnalyticFunction, AnalyticityDescriptor, ConditionKind};
use crate::sum::ComplexNeumaier;
use crate::util::bisect;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Node count above which ũ is evaluated on the rayon pool.
const PAR_THRESHOLD: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Trap,
    Sinh1,
    Sinh2,
    Sinh3,
    Log,
}

impl Method {
    /// Preference order used by automatic selection.
    pub const AUTO_ORDER: [Method; 5] = [Method::Sinh2, Method::Sinh1, Method::Sinh3, Method::Log, Method::Trap];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Trap => "trap",
            Method::Sinh1 => "sinh1",
            Method::Sinh2 => "sinh2",
            Method::Sinh3 => "sinh3",
            Method::Log => "log",
        }
    }

    fn condition(&self) -> Condition {
        match self {
            Method::Trap => Condition::Annulus,
            Method::Sinh1 => Condition::Sinh1,
            Method::Sinh2 => Condition::Sinh2,
            Method::Sinh3 => Condition::Sinh3,
            Method::Log => Condition::Log,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trap" => Ok(Method::Trap),
            "sinh1" => Ok(Method::Sinh1),
            "sinh2" => Ok(Method::Sinh2),
            "sinh3" => Ok(Method::Sinh3),
            "log" => Ok(Method::Log),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Step, truncation and cached nodes `χ(jζ)` with Jacobians `dχ/dy`.
///
/// Unfolded grids hold `j = −N..=N`; folded grids hold `j = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub zeta: f64,
    pub n_half: usize,
    pub lambda: f64,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    pub folded: bool,
}

impl QuadratureGrid {
    pub fn build(map: impl Fn(f64) -> (Complex64, Complex64), zeta: f64, n_half: usize, folded: bool) -> Self {
        let start = if folded { 0 } else { -(n_half as i64) };
        let (nodes, weights) = (start..=n_half as i64).map(|j| map(j as f64 * zeta)).unzip();
        QuadratureGrid { zeta, n_half, lambda: n_half as f64 * zeta, nodes, weights, folded }
    }

    pub fn for_sinh(c: &SinhContour, zeta: f64, n_half: usize, folded: bool) -> Self {
        Self::build(|y| (c.map(y), c.derivative(y)), zeta, n_half, folded)
    }

    pub fn for_log(c: &LogContour, zeta: f64, n_half: usize, folded: bool) -> Self {
        Self::build(|y| (c.map(y), I * c.derivative(y)), zeta, n_half, folded)
    }

    /// Nodes with `j ≥ 0` (index 0 is `j = 0`).
    fn nonnegative(&self) -> (&[Complex64], &[Complex64]) {
        if self.folded {
            (&self.nodes, &self.weights)
        } else {
            (&self.nodes[self.n_half..], &self.weights[self.n_half..])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionReport {
    pub value: Complex64,
    pub nodes_used: usize,
    pub est_discretization_error: f64,
    pub est_truncation_error: f64,
    pub method: Method,
}

/// Tolerance and optional overrides for parameter selection. `None` means "derive".
#[derive(Debug, Clone, PartialEq)]
pub struct Tuning {
    pub eps: f64,
    /// Overflow budget M with `r₊ = e^{−(M−M₁)/n}`, `r₋ = e^{−(M+M₁)/n}`.
    pub m_budget: Option<f64>,
    pub m1: Option<f64>,
    /// `(r₋, r₊)`; in the w-plane for Z-SINH-II and powered Z-SINH-III.
    pub interval: Option<(f64, f64)>,
    pub omega: Option<f64>,
    pub d_half: Option<f64>,
    pub k_d: f64,
    /// Factor applied to the truncation parameter Λ.
    pub reduce: f64,
    pub zeta: Option<f64>,
    pub n_half: Option<usize>,
    /// Trapezoid radius and node count.
    pub radius: Option<f64>,
    pub trap_nodes: Option<usize>,
    /// Power of the change of variables for Z-SINH-II/III.
    pub p: f64,
    /// Pre-rotation for Z-SINH-III: ũ(z e^{iφ}).
    pub phi: f64,
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning {
            eps: 1e-15,
            m_budget: None,
            m1: None,
            interval: None,
            omega: None,
            d_half: None,
            k_d: 0.9,
            reduce: 1.0,
            zeta: None,
            n_half: None,
            radius: None,
            trap_nodes: None,
            p: 1.0,
            phi: 0.0,
        }
    }
}

impl Tuning {
    pub fn with_eps(eps: f64) -> Self {
        Tuning { eps, ..Default::default() }
    }

    /// Default budget: rounding of terms of size `e^{M+M₁}` stays near ε.
    pub fn budget(&self) -> (f64, f64) {
        let m = self.m_budget.unwrap_or_else(|| (self.eps / f64::EPSILON).ln().max(0.0) / 1.9).max(1.0);
        (m, self.m1.unwrap_or(0.9 * m))
    }

    fn check(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::param("eps", format!("must lie in (0,1), got {}", self.eps)));
        }
        if !(self.reduce > 0.0 && self.reduce <= 1.0) {
            return Err(Error::param("reduce", format!("must lie in (0,1], got {}", self.reduce)));
        }
        if !(self.k_d > 0.0 && self.k_d < 1.0) {
            return Err(Error::param("k_d", format!("must lie in (0,1), got {}", self.k_d)));
        }
        if !(self.p >= 1.0) {
            return Err(Error::param("p", format!("must be >= 1, got {}", self.p)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourKind {
    Circle { r: f64 },
    Sinh(SinhContour),
    Log { contour: LogContour, d_half: f64 },
}

/// Everything an engine needs for a range of n sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub method: Method,
    pub contour: ContourKind,
    pub grid: QuadratureGrid,
    pub p: f64,
    pub phi: f64,
    /// Hardy-norm estimate used for the step.
    pub hardy: f64,
    pub strip_half_width: f64,
}

impl Plan {
    pub fn nodes(&self) -> usize {
        self.grid.nodes.len()
    }
}

// ---------------------------------------------------------------- step and truncation

/// `ζ = 2πd / ln(H/ε)`.
pub fn step_from_hardy(d_half: f64, h_appr: f64, eps: f64) -> Result<f64> {
    if !(d_half > 0.0 && h_appr > 0.0 && eps > 0.0) {
        return Err(Error::param("d_half", "step needs positive d, H and eps"));
    }
    let l = (h_appr / eps).ln();
    if !(l > 0.0) {
        return Err(Error::param("eps", "H/eps must exceed 1"));
    }
    Ok(2.0 * PI * d_half / l)
}

/// `Λ = reduce·(ln(C/ε)/decay − ln(b/2) + Λ₀)` with `decay = n − m` and Λ₀ the contour length
/// inside the unit disc.
pub fn truncation_lambda(decay: f64, c_u: f64, contour: &SinhContour, eps: f64, reduce: f64) -> Result<f64> {
    if !(decay > 0.0) {
        return Err(Error::param("n", "truncation needs n > m"));
    }
    let lambda0 = arc_length_inside_unit_disc(contour);
    let l = ((c_u / eps).ln() / decay - (contour.b / 2.0).ln() + lambda0) * reduce;
    Ok(l.max(0.0))
}

/// Bound `‖h‖ ρ^{−N}/(1−ρ^{−N})` for the N-point trapezoid rule.
pub fn trapezoid_error_bound(hardy_norm: f64, rho: f64, n_nodes: usize) -> Result<f64> {
    if !(rho > 1.0) {
        return Err(Error::param("rho", format!("must exceed 1, got {rho}")));
    }
    let q = rho.powf(-(n_nodes as f64));
    Ok(hardy_norm * q / (1.0 - q))
}

/// `⌈(n/M)(ln(1/ε) + 2M)⌉`.
pub fn trapezoid_node_estimate(eps: f64, n: u32, m: f64) -> usize {
    ((n as f64 / m) * ((1.0 / eps).ln() + 2.0 * m)).ceil() as usize
}

// ---------------------------------------------------------------- selection

fn check_n(desc: &AnalyticityDescriptor, n: u32) -> Result<()> {
    if (n as f64) <= desc.growth_m {
        return Err(Error::param("n", format!("deformation needs n > m = {}, got {n}", desc.growth_m)));
    }
    Ok(())
}

fn require(u: &AnalyticFunction, method: Method) -> Result<f64> {
    let c = &u.descriptor.conditions;
    let angle = match method {
        Method::Sinh1 => c.sinh1,
        Method::Sinh2 => c.sinh2,
        Method::Sinh3 => c.sinh3,
        Method::Log => c.log,
        Method::Trap => Some(0.0),
    };
    angle.ok_or_else(|| {
        let hint = Method::AUTO_ORDER
            .iter()
            .filter(|m| **m != method && (**m == Method::Trap || require_silent(u, **m)))
            .map(|m| m.name())
            .collect::<Vec<_>>()
            .join(", ");
        Error::condition(method.condition(), format!("{} does not satisfy it; try {hint}", u.name))
    })
}

fn require_silent(u: &AnalyticFunction, m: Method) -> bool {
    let k = match m {
        Method::Sinh1 => ConditionKind::Sinh1,
        Method::Sinh2 => ConditionKind::Sinh2,
        Method::Sinh3 => ConditionKind::Sinh3,
        Method::Log => ConditionKind::Log,
        Method::Trap => ConditionKind::AnnulusOnly,
    };
    u.descriptor.conditions.holds(k)
}

/// Default `(r₋, r₊)` for effective exponent `n_eff`, scaled into the annulus.
fn default_interval(t: &Tuning, scale: f64, n_eff: f64) -> (f64, f64) {
    let (m, m1) = t.budget();
    (scale * (-(m + m1) / n_eff).exp(), scale * (-(m - m1) / n_eff).exp())
}

fn check_interval(r_minus: f64, r_plus: f64, a_minus: f64, a_plus: f64) -> Result<()> {
    if !(r_minus > a_minus && r_plus < a_plus && r_minus < r_plus) {
        return Err(Error::Domain(format!(
            "interval ({r_minus}, {r_plus}) must lie inside the annulus ({a_minus}, {a_plus})"
        )));
    }
    Ok(())
}

struct SinhSetup {
    contour: SinhContour,
    n_eff_hi: f64,
    decay_lo: f64,
}

/// Step, half count and Hardy estimate for a fitted sinh contour.
fn sinh_step(u: &AnalyticFunction, s: &SinhSetup, t: &Tuning) -> Result<(f64, usize, f64)> {
    let c = &s.contour;
    let dist = c.strip_origin_distance();
    if !(dist > 0.0) {
        return Err(Error::Domain("strip image reaches the origin".into()));
    }
    let hardy = dist.powf(-s.n_eff_hi) + 10.0;
    if !hardy.is_finite() {
        return Err(Error::Overflow(format!("Hardy estimate overflows at distance {dist}")));
    }
    let lambda = truncation_lambda(s.decay_lo, u.descriptor.growth_c, c, t.eps, t.reduce)?;
    let (zeta, n_half) = match (t.zeta, t.n_half) {
        (Some(z), Some(n)) => (z, n),
        (Some(z), None) => (z, (lambda / z).ceil() as usize),
        (None, Some(n)) => (lambda / n as f64, n),
        (None, None) => {
            let z = step_from_hardy(c.d_half, hardy, t.eps)?;
            (z, (lambda / z).ceil() as usize)
        }
    };
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::param("zeta", format!("invalid step {zeta}")));
    }
    Ok((zeta, n_half, hardy))
}

fn finish_sinh(
    u: &AnalyticFunction,
    method: Method,
    s: SinhSetup,
    t: &Tuning,
    fold: bool,
    p: f64,
    phi: f64,
) -> Result<Plan> {
    let (zeta, n_half, hardy) = sinh_step(u, &s, t)?;
    let c = s.contour;
    Ok(Plan {
        method,
        contour: ContourKind::Sinh(c),
        grid: QuadratureGrid::for_sinh(&c, zeta, n_half, fold),
        p,
        phi,
        hardy,
        strip_half_width: c.d_half,
    })
}

fn select_sinh1(u: &AnalyticFunction, n_lo: u32, n_hi: u32, t: &Tuning) -> Result<Plan> {
    let alpha = require(u, Method::Sinh1)?;
    let d = &u.descriptor;
    let (r_minus, r_plus) = t.interval.unwrap_or_else(|| default_interval(t, d.a_plus.min(1.0), n_hi as f64));
    check_interval(r_minus, r_plus, d.a_minus, d.a_plus)?;
    let (omega, d_half) = if alpha > PI / 2.0 {
        (t.omega.unwrap_or(PI / 4.0 - alpha / 2.0), t.d_half.unwrap_or(t.k_d * (alpha / 2.0 - PI / 4.0)))
    } else {
        let (w, dh) = small_angle_params(r_plus - r_minus)?;
        (t.omega.unwrap_or(PI / 2.0 - alpha + w), t.d_half.unwrap_or(dh))
    };
    if omega - d_half <= PI / 2.0 - alpha {
        return Err(Error::condition(
            Condition::Sinh1,
            format!("strip angle omega - d = {} leaves the cone of half-angle {alpha}", omega - d_half),
        ));
    }
    if omega + d_half >= 0.0 && !admissible_rpm(r_minus, r_plus, omega, d_half) {
        return Err(Error::condition(
            Condition::Sinh1,
            format!("interval ({r_minus}, {r_plus}) is not admissible for omega={omega}, d={d_half}; try sinh2"),
        ));
    }
    let contour = fitted_contour(r_minus, r_plus, omega, d_half)?;
    let s = SinhSetup { contour, n_eff_hi: n_hi as f64, decay_lo: n_lo as f64 - d.growth_m };
    finish_sinh(u, Method::Sinh1, s, t, u.conjugate_symmetric, 1.0, 0.0)
}

fn select_sinh2(u: &AnalyticFunction, n_lo: u32, n_hi: u32, t: &Tuning) -> Result<Plan> {
    let alpha = require(u, Method::Sinh2)?;
    let d = &u.descriptor;
    let p = t.p;
    let g_plus = PI / (2.0 * p) - PI / 2.0;
    let g_minus = (PI - alpha) / (2.0 * p) - PI / 2.0;
    let omega = t.omega.unwrap_or(0.5 * (g_plus + g_minus));
    let d_half = t.d_half.unwrap_or(t.k_d * 0.5 * (g_plus - g_minus));
    if omega + d_half > g_plus + 1e-15 || omega - d_half < g_minus - 1e-15 {
        return Err(Error::condition(
            Condition::Sinh2,
            format!("strip ({}, {}) leaves ({g_minus}, {g_plus})", omega - d_half, omega + d_half),
        ));
    }
    let pw = 2.0 * p;
    let n_hi_eff = pw * n_hi as f64;
    let (r_minus, r_plus) =
        t.interval.unwrap_or_else(|| default_interval(t, d.a_plus.min(1.0).powf(1.0 / pw), n_hi_eff));
    check_interval(r_minus, r_plus, d.a_minus.powf(1.0 / pw), d.a_plus.powf(1.0 / pw))?;
    let contour = fitted_contour(r_minus, r_plus, omega, d_half)?;
    let s = SinhSetup { contour, n_eff_hi: n_hi_eff, decay_lo: pw * (n_lo as f64 - d.growth_m) };
    finish_sinh(u, Method::Sinh2, s, t, u.conjugate_symmetric, p, 0.0)
}

fn select_sinh3(u: &AnalyticFunction, n_lo: u32, n_hi: u32, t: &Tuning) -> Result<Plan> {
    let gamma = require(u, Method::Sinh3)?;
    let d = &u.descriptor;
    let p = t.p;
    let n_hi_eff = p * n_hi as f64;
    let (r_minus, r_plus) =
        t.interval.unwrap_or_else(|| default_interval(t, d.a_plus.min(1.0).powf(1.0 / p), n_hi_eff));
    check_interval(r_minus, r_plus, d.a_minus.powf(1.0 / p), d.a_plus.powf(1.0 / p))?;
    let (g_minus, g_plus) = if p == 1.0 {
        (-gamma, gamma)
    } else {
        let gp = 0.5 * PI * (1.0 / p - 1.0);
        (gp - gamma / p, gp)
    };
    let fold = u.conjugate_symmetric && t.phi == 0.0;
    let decay_lo = p * (n_lo as f64 - d.growth_m);
    let setup = |omega: f64, d_half: f64| -> Result<SinhSetup> {
        if omega + d_half > g_plus + 1e-15 || omega - d_half < g_minus - 1e-15 {
            return Err(Error::condition(
                Condition::Sinh3,
                format!("strip ({}, {}) leaves ({g_minus}, {g_plus})", omega - d_half, omega + d_half),
            ));
        }
        let contour = fitted_contour(r_minus, r_plus, omega, d_half)?;
        Ok(SinhSetup { contour, n_eff_hi: n_hi_eff, decay_lo })
    };
    if p != 1.0 || t.d_half.is_some() {
        let omega = t.omega.unwrap_or(if p == 1.0 { 0.0 } else { 0.5 * (g_plus + g_minus) });
        let d_half = t.d_half.unwrap_or(t.k_d * 0.5 * (g_plus - g_minus));
        return finish_sinh(u, Method::Sinh3, setup(omega, d_half)?, t, fold, p, t.phi);
    }
    // p = 1: scan the strip half-width for the smallest node count
    let omega = t.omega.unwrap_or(0.0);
    let d_max = t.k_d * (gamma - omega.abs());
    let mut best: Option<(usize, SinhSetup)> = None;
    for k in 1..=32 {
        let d_half = d_max * k as f64 / 32.0;
        let Ok(s) = setup(omega, d_half) else { continue };
        let Ok((_, n_half, _)) = sinh_step(u, &s, t) else { continue };
        if best.as_ref().is_none_or(|b| n_half <= b.0) {
            best = Some((n_half, s));
        }
    }
    let (_, s) = best.ok_or_else(|| Error::condition(Condition::Sinh3, "no admissible strip width"))?;
    finish_sinh(u, Method::Sinh3, s, t, fold, p, t.phi)
}

fn select_log(u: &AnalyticFunction, n_lo: u32, n_hi: u32, t: &Tuning) -> Result<Plan> {
    require(u, Method::Log)?;
    let d = &u.descriptor;
    let (r_minus, r_plus) = t.interval.unwrap_or_else(|| default_interval(t, d.a_plus.min(1.0), n_hi as f64));
    check_interval(r_minus, r_plus, d.a_minus, d.a_plus)?;
    let (contour, d_fit) = fit_log_to_interval(r_minus, r_plus)?;
    let d_half = t.d_half.unwrap_or(d_fit);
    let hardy = r_minus.powf(-(n_hi as f64)) + 10.0;
    let decay = n_lo as f64 - d.growth_m;
    if !(decay > 0.0) {
        return Err(Error::param("n", "truncation needs n > m"));
    }
    let radius = (d.growth_c / t.eps).powf(1.0 / decay);
    let lambda = if radius <= contour.sigma {
        0.0
    } else {
        let f = |y: f64| contour.map(y).norm() - radius;
        let mut hi = 1.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
        }
        bisect(f, 0.0, hi, 1e-14)?
    } * t.reduce;
    let (zeta, n_half) = match (t.zeta, t.n_half) {
        (Some(z), Some(n)) => (z, n),
        (Some(z), None) => (z, (lambda / z).ceil() as usize),
        (None, Some(n)) => (lambda / n as f64, n),
        (None, None) => {
            let z = step_from_hardy(d_half, hardy, t.eps)?;
            (z, (lambda / z).ceil() as usize)
        }
    };
    let fold = u.conjugate_symmetric;
    Ok(Plan {
        method: Method::Log,
        contour: ContourKind::Log { contour, d_half },
        grid: QuadratureGrid::for_log(&contour, zeta, n_half, fold),
        p: 1.0,
        phi: 0.0,
        hardy,
        strip_half_width: d_half,
    })
}

fn select_trap(u: &AnalyticFunction, n_hi: u32, t: &Tuning) -> Result<Plan> {
    let d = &u.descriptor;
    let (m, _) = t.budget();
    let n_eff = (n_hi as f64).max(1.0);
    let r = t.radius.unwrap_or_else(|| d.a_plus.min(1.0) * (-m / n_eff).exp());
    if !(r > d.a_minus && r < d.a_plus) {
        return Err(Error::Domain(format!("radius {r} outside the annulus ({}, {})", d.a_minus, d.a_plus)));
    }
    let count = t.trap_nodes.unwrap_or_else(|| trapezoid_node_estimate(t.eps, n_hi.max(1), m)).max(1);
    let grid = QuadratureGrid {
        zeta: 2.0 * PI / count as f64,
        n_half: count,
        lambda: 2.0 * PI,
        nodes: (0..count).map(|k| r * unit_root(k as u64, count as u64)).collect(),
        weights: Vec::new(),
        folded: false,
    };
    Ok(Plan {
        method: Method::Trap,
        contour: ContourKind::Circle { r },
        grid,
        p: 1.0,
        phi: 0.0,
        hardy: 0.0,
        strip_half_width: 0.0,
    })
}

/// Choose contour and grid for `n ∈ [n_lo, n_hi]`: the Hardy estimate uses `n_hi`, truncation `n_lo`.
pub fn select_params(u: &AnalyticFunction, method: Method, n_lo: u32, n_hi: u32, t: &Tuning) -> Result<Plan> {
    t.check()?;
    if n_lo > n_hi {
        return Err(Error::param("n", format!("empty range [{n_lo}, {n_hi}]")));
    }
    if method != Method::Trap {
        check_n(&u.descriptor, n_lo)?;
    }
    match method {
        Method::Trap => select_trap(u, n_hi, t),
        Method::Sinh1 => select_sinh1(u, n_lo, n_hi, t),
        Method::Sinh2 => select_sinh2(u, n_lo, n_hi, t),
        Method::Sinh3 => select_sinh3(u, n_lo, n_hi, t),
        Method::Log => select_log(u, n_lo, n_hi, t),
    }
}

/// First method in [`Method::AUTO_ORDER`] whose condition holds and whose parameters can be chosen.
pub fn select_auto(u: &AnalyticFunction, n_lo: u32, n_hi: u32, t: &Tuning) -> Result<Plan> {
    let mut last = None;
    for m in Method::AUTO_ORDER {
        if m != Method::Trap && !require_silent(u, m) {
            continue;
        }
        match select_params(u, m, n_lo, n_hi, t) {
            Ok(p) => return Ok(p),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Domain("no applicable method".into())))
}

// ---------------------------------------------------------------- evaluation

#[inline]
fn unit_root(k: u64, n: u64) -> Complex64 {
    // e^{2πik/n} with the argument reduced to [−π, π]
    let k = k % n;
    let k2 = if 2 * k > n { k as f64 - n as f64 } else { k as f64 };
    Complex64::from_polar(1.0, 2.0 * PI * k2 / n as f64)
}

fn eval_all(f: impl Fn(Complex64) -> Complex64 + Sync, zs: &[Complex64]) -> Vec<Complex64> {
    if zs.len() >= PAR_THRESHOLD {
        zs.par_iter().map(|&z| f(z)).collect()
    } else {
        zs.iter().map(|&z| f(z)).collect()
    }
}

fn check_finite(vals: &[Complex64], nodes: &[Complex64], what: &str) -> Result<()> {
    if let Some(i) = vals.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Domain(format!("{what} is not finite at node {} (branch cut or outside domain)", nodes[i])));
    }
    Ok(())
}

/// Values of ũ cached on the grid of a plan, reusable for every n.
pub struct Prepared<'a> {
    plan: &'a Plan,
    nodes: &'a [Complex64],
    weights: &'a [Complex64],
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
    folded: bool,
}

impl<'a> Prepared<'a> {
    pub fn new(u: &AnalyticFunction, plan: &'a Plan) -> Result<Self> {
        let g = &plan.grid;
        let fold = match plan.method {
            Method::Trap => false,
            Method::Sinh3 => u.conjugate_symmetric && plan.phi == 0.0,
            _ => u.conjugate_symmetric,
        };
        let (nodes, weights) = if fold {
            g.nonnegative()
        } else if g.folded {
            return Err(Error::Unsupported("folded grid needs a conjugate-symmetric function".into()));
        } else {
            (&g.nodes[..], &g.weights[..])
        };
        let rot = Complex64::from_polar(1.0, plan.phi);
        let p = plan.p;
        let f = |z: Complex64| u.eval(z);
        let (plus, minus) = match plan.method {
            Method::Trap | Method::Sinh1 => (eval_all(f, nodes), Vec::new()),
            Method::Sinh2 => (eval_all(|w: Complex64| f((w.ln() * (2.0 * p)).exp()), nodes), Vec::new()),
            Method::Sinh3 | Method::Log => {
                let lift = |w: Complex64| if p == 1.0 { w } else { (w.ln() * p).exp() };
                (eval_all(|w| f(lift(w) * rot), nodes), eval_all(|w| f(-(lift(w) * rot)), nodes))
            }
        };
        check_finite(&plus, nodes, "transform")?;
        check_finite(&minus, nodes, "transform")?;
        Ok(Prepared { plan, nodes, weights, plus, minus, folded: fold })
    }

    pub fn nodes_used(&self) -> usize {
        self.nodes.len()
    }

    pub fn invert(&self, n: u32) -> Result<InversionReport> {
        let plan = self.plan;
        if plan.method == Method::Trap {
            return self.invert_trap(n);
        }
        let p = plan.p;
        let (k, factor) = match plan.method {
            Method::Sinh2 => (2.0 * n as f64 * p + 1.0, p / (PI * I)),
            Method::Sinh3 | Method::Log => (n as f64 * p + 1.0, p / (2.0 * PI * I)),
            _ => (n as f64 + 1.0, 1.0 / (2.0 * PI * I)),
        };
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let zeta = plan.grid.zeta;
        let term = |j: usize| -> Result<Complex64> {
            let z = self.nodes[j];
            let lz = z.ln();
            let e = -k * lz.re;
            if e > 700.0 {
                return Err(Error::Overflow(format!("|node|^-{k} overflows at node {z}")));
            }
            let g = if self.minus.is_empty() { self.plus[j] } else { self.plus[j] + sign * self.minus[j] };
            Ok(g * (-k * lz).exp() * self.weights[j] * factor * zeta)
        };
        let len = self.nodes.len();
        let mut acc = ComplexNeumaier::new();
        let mut last = Complex64::new(0.0, 0.0);
        let mut prev = Complex64::new(0.0, 0.0);
        if self.folded {
            let t0 = term(0)?;
            acc.add(Complex64::new(t0.re, 0.0));
            for j in 1..len {
                let t = term(j)?;
                acc.add(Complex64::new(2.0 * t.re, 0.0));
                prev = last;
                last = t;
            }
        } else {
            for j in 0..len {
                acc.add(term(j)?);
            }
            let n_half = plan.grid.n_half;
            if n_half > 0 {
                last = term(0)?.norm().max(term(len - 1)?.norm()).into();
                prev = term(1)?.norm().max(term(len - 2)?.norm()).into();
            }
        }
        let mut value = acc.total();
        if plan.phi != 0.0 {
            value *= Complex64::from_polar(1.0, -(n as f64) * plan.phi);
        }
        let disc = if plan.strip_half_width > 0.0 {
            let q = (-2.0 * PI * plan.strip_half_width / zeta).exp();
            plan.hardy * q / (1.0 - q)
        } else {
            0.0
        };
        let (ln, lp) = (last.norm(), prev.norm());
        let trunc = if ln == 0.0 {
            0.0
        } else if lp > ln {
            let r = ln / lp;
            2.0 * ln * r / (1.0 - r)
        } else {
            2.0 * ln * len as f64
        };
        Ok(InversionReport {
            value,
            nodes_used: len,
            est_discretization_error: disc,
            est_truncation_error: trunc,
            method: plan.method,
        })
    }

    fn invert_trap(&self, n: u32) -> Result<InversionReport> {
        let ContourKind::Circle { r } = self.plan.contour else { unreachable!() };
        let count = self.nodes.len() as u64;
        let e = n as f64 * (1.0 / r).ln();
        if e > 700.0 {
            return Err(Error::Overflow(format!("r^-n overflows: n ln(1/r) = {e}")));
        }
        let mut acc = ComplexNeumaier::new();
        for (kk, v) in self.plus.iter().enumerate() {
            let idx = ((n as u64 % count) * kk as u64) % count;
            acc.add(*v * unit_root(idx, count).conj());
        }
        let value = acc.total() * (r.powi(-(n as i32)) / count as f64);
        Ok(InversionReport {
            value,
            nodes_used: count as usize,
            est_discretization_error: 0.0,
            est_truncation_error: 0.0,
            method: Method::Trap,
        })
    }
}

pub fn invert(u: &AnalyticFunction, n: u32, plan: &Plan) -> Result<InversionReport> {
    Prepared::new(u, plan)?.invert(n)
}

/// Every n in `ns` against one grid; ũ is evaluated once per node.
pub fn invert_batch(u: &AnalyticFunction, ns: &[u32], plan: &Plan) -> Result<Vec<InversionReport>> {
    let prep = Prepared::new(u, plan)?;
    ns.iter().map(|&n| prep.invert(n)).collect()
}

/// Parameter selection followed by inversion.
pub fn moment(u: &AnalyticFunction, n: u32, method: Method, t: &Tuning) -> Result<InversionReport> {
    let plan = select_params(u, method, n, n, t)?;
    invert(u, n, &plan)
}

// ---------------------------------------------------------------- entry points per engine

/// `(1/N)·Σ ũ(rζᵏ)(rζᵏ)^{−n}` with `ζ = e^{2πi/N}`.
pub fn trapezoid_invert(u: &AnalyticFunction, n: u32, r: f64, n_nodes: usize) -> Result<Complex64> {
    let t = Tuning { radius: Some(r), trap_nodes: Some(n_nodes), ..Default::default() };
    Ok(invert(u, n, &select_trap(u, n, &t)?)?.value)
}

fn descriptor_only(desc: &AnalyticityDescriptor) -> AnalyticFunction {
    AnalyticFunction::new("descriptor", |_| Complex64::new(1.0, 0.0), desc.clone(), false)
}

/// Contour and two-sided grid for Z-SINH-I from the budget `(M, M₁)`.
pub fn sinh1_select_params(
    desc: &AnalyticityDescriptor,
    n: u32,
    eps: f64,
    m: f64,
    m1: f64,
) -> Result<(SinhContour, QuadratureGrid)> {
    let t = Tuning { eps, m_budget: Some(m), m1: Some(m1), ..Default::default() };
    let plan = select_params(&descriptor_only(desc), Method::Sinh1, n, n, &t)?;
    match plan.contour {
        ContourKind::Sinh(c) => Ok((c, plan.grid)),
        _ => unreachable!(),
    }
}

fn sinh_plan(method: Method, c: &SinhContour, g: &QuadratureGrid, p: f64, phi: f64, n_eff: f64) -> Plan {
    Plan {
        method,
        contour: ContourKind::Sinh(*c),
        grid: g.clone(),
        p,
        phi,
        hardy: c.strip_origin_distance().powf(-n_eff) + 10.0,
        strip_half_width: c.d_half,
    }
}

pub fn sinh1_invert(u: &AnalyticFunction, n: u32, c: &SinhContour, g: &QuadratureGrid) -> Result<InversionReport> {
    check_n(&u.descriptor, n)?;
    invert(u, n, &sinh_plan(Method::Sinh1, c, g, 1.0, 0.0, n as f64))
}

pub fn sinh2_invert(
    u: &AnalyticFunction,
    n: u32,
    p: f64,
    c: &SinhContour,
    g: &QuadratureGrid,
) -> Result<InversionReport> {
    check_n(&u.descriptor, n)?;
    invert(u, n, &sinh_plan(Method::Sinh2, c, g, p, 0.0, 2.0 * p * n as f64))
}

pub fn sinh3_invert(
    u: &AnalyticFunction,
    n: u32,
    p: f64,
    phi: f64,
    c: &SinhContour,
    g: &QuadratureGrid,
) -> Result<InversionReport> {
    check_n(&u.descriptor, n)?;
    invert(u, n, &sinh_plan(Method::Sinh3, c, g, p, phi, p * n as f64))
}

pub fn log_invert(u: &AnalyticFunction, n: u32, c: &LogContour, g: &QuadratureGrid) -> Result<InversionReport> {
    check_n(&u.descriptor, n)?;
    let plan = Plan {
        method: Method::Log,
        contour: ContourKind::Log { contour: *c, d_half: 0.0 },
        grid: g.clone(),
        p: 1.0,
        phi: 0.0,
        hardy: 0.0,
        strip_half_width: 0.0,
    };
    invert(u, n, &plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{kobol_mgf, AnalyticityDescriptor};

    fn geometric() -> AnalyticFunction {
        // 1/(2 − z) = Σ 2^{−n−1} zⁿ
        AnalyticFunction::new("1/(2-z)", |z| 1.0 / (2.0 - z), AnalyticityDescriptor::annulus(0.0, 2.0).unwrap(), true)
    }

    #[test]
    fn step_for_reference_configuration() {
        let z = step_from_hardy(0.7069, 0.98f64.powi(-100) + 10.0, 1e-15).unwrap();
        assert!((z - 0.1187).abs() < 5e-4, "{z}");
    }

    #[test]
    fn node_estimate_is_linear_in_n() {
        let a = trapezoid_node_estimate(1e-12, 100, 5.0);
        let b = trapezoid_node_estimate(1e-12, 200, 5.0);
        assert!((b as f64 / a as f64 - 2.0).abs() < 0.01);
    }

    #[test]
    fn trapezoid_recovers_geometric_coefficients() {
        let u = geometric();
        for n in [0u32, 3, 7, 20] {
            let v = trapezoid_invert(&u, n, 1.0, 128).unwrap();
            assert!((v.re - 0.5f64.powi(n as i32 + 1)).abs() < 1e-16, "n={n}: {v}");
        }
    }

    #[test]
    fn unit_roots_are_exact_at_quarters() {
        assert_eq!(unit_root(0, 8), Complex64::new(1.0, 0.0));
        assert!((unit_root(2, 8) - Complex64::new(0.0, 1.0)).norm() < 1e-16);
        assert!((unit_root(12, 8) - Complex64::new(-1.0, 0.0)).norm() < 2e-16);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::AUTO_ORDER {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("sinh4".parse::<Method>().is_err());
    }

    #[test]
    fn folded_and_full_sums_agree() {
        let u = kobol_mgf(0.1, 0.5, 1.01, 0.0).unwrap();
        let plan = select_params(&u, Method::Sinh1, 100, 100, &Tuning::default()).unwrap();
        let folded = invert(&u, 100, &plan).unwrap().value;
        let mut full = u.clone();
        full.conjugate_symmetric = false;
        let full_plan = select_params(&full, Method::Sinh1, 100, 100, &Tuning::default()).unwrap();
        assert_eq!(full_plan.grid.nodes.len(), 2 * plan.grid.nodes.len() - 1);
        let v = invert(&full, 100, &full_plan).unwrap().value;
        assert!((folded.re - v.re).abs() < 1e-18, "{folded} {v}");
        assert!(v.im.abs() < 1e-18, "{v}");
    }

    #[test]
    fn refuses_n_not_above_growth() {
        let u = kobol_mgf(0.1, 0.5, 1.01, 0.0).unwrap();
        assert!(matches!(
            select_params(&u, Method::Sinh1, 0, 0, &Tuning::default()),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn tuning_validation() {
        let u = geometric();
        let bad = Tuning { reduce: 1.5, ..Default::default() };
        assert!(select_params(&u, Method::Trap, 5, 5, &bad).is_err());
    }

    #[test]
    fn trap_overflow_is_numerical_failure() {
        let u = geometric();
        let t = Tuning { radius: Some(0.5), trap_nodes: Some(64), ..Default::default() };
        let e = moment(&u, 2000, Method::Trap, &t).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
    }
}
