//! Concrete transforms with analyticity metadata.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ConditionKind {
    Sinh1,
    Sinh2,
    Sinh3,
    Log,
    AnnulusOnly,
}

/// Every deformation condition the function satisfies, with its angle.
///
/// `sinh1`/`sinh2` hold the cone angle α of the left cone `a₊ − C_α` in the z-plane;
/// α ≤ π/2 means only contours with ω > 0 fit (exponential growth to the right).
/// `sinh3` holds γ of the cones around the imaginary axis. `log` holds the exponential rate m'.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conditions {
    pub sinh1: Option<f64>,
    pub sinh2: Option<f64>,
    pub sinh3: Option<f64>,
    pub log: Option<f64>,
}

impl Conditions {
    fn entire() -> Self {
        Conditions { sinh1: Some(PI), sinh2: Some(PI), sinh3: Some(PI / 2.0), log: Some(0.0) }
    }

    fn intersect(&self, o: &Conditions) -> Conditions {
        let min = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        };
        let max = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
        Conditions {
            sinh1: min(self.sinh1, o.sinh1),
            sinh2: min(self.sinh2, o.sinh2),
            sinh3: min(self.sinh3, o.sinh3),
            log: max(self.log, o.log),
        }
    }

    pub fn holds(&self, kind: ConditionKind) -> bool {
        match kind {
            ConditionKind::Sinh1 => self.sinh1.is_some(),
            ConditionKind::Sinh2 => self.sinh2.is_some(),
            ConditionKind::Sinh3 => self.sinh3.is_some(),
            ConditionKind::Log => self.log.is_some(),
            ConditionKind::AnnulusOnly => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticityDescriptor {
    pub a_minus: f64,
    pub a_plus: f64,
    pub cone_angle: Option<f64>,
    pub growth_m: f64,
    pub growth_c: f64,
    pub kind: ConditionKind,
    pub conditions: Conditions,
}

impl AnalyticityDescriptor {
    /// Only analytic in `a₋ < |z| < a₊`.
    pub fn annulus(a_minus: f64, a_plus: f64) -> Result<Self> {
        if !(a_minus >= 0.0 && a_minus < a_plus) {
            return Err(Error::param("a_minus", format!("need 0 <= a_minus < a_plus, got {a_minus}, {a_plus}")));
        }
        Ok(AnalyticityDescriptor {
            a_minus,
            a_plus,
            cone_angle: None,
            growth_m: 0.0,
            growth_c: 1.0,
            kind: ConditionKind::AnnulusOnly,
            conditions: Conditions::default(),
        })
    }

    fn with_conditions(a_minus: f64, a_plus: f64, conditions: Conditions, kind: ConditionKind) -> Self {
        let cone_angle = match kind {
            ConditionKind::Sinh1 => conditions.sinh1,
            ConditionKind::Sinh2 => conditions.sinh2,
            ConditionKind::Sinh3 => conditions.sinh3,
            _ => None,
        };
        AnalyticityDescriptor { a_minus, a_plus, cone_angle, growth_m: 0.0, growth_c: 1.0, kind, conditions }
    }

    /// Three contours inside the declared domain, `per_contour` points each.
    pub fn domain_samples(&self, per_contour: usize) -> Vec<Complex64> {
        let hi = self.a_plus.min(1e6);
        let mid = if self.a_minus < 1.0 && 1.0 < self.a_plus { 1.0 } else { 0.5 * (self.a_minus + hi) };
        let tmax = 100.0;
        let mut contours: Vec<Box<dyn Fn(f64) -> Complex64>> = Vec::new();
        contours.push(Box::new(move |t| Complex64::from_polar(mid, 2.0 * PI * t)));
        if let Some(alpha) = self.conditions.sinh1.or(self.conditions.sinh2) {
            let c0 = 0.5 * (mid + hi);
            let dir = Complex64::from_polar(1.0, 0.8 * alpha);
            contours.push(Box::new(move |t| c0 - tmax * t * dir));
        }
        if let Some(gamma) = self.conditions.sinh3 {
            let dir = Complex64::from_polar(1.0, PI / 2.0 - 0.8 * gamma);
            contours.push(Box::new(move |t| (2.0 * t - 1.0) * tmax * dir));
        }
        if self.conditions.log.is_some() {
            contours.push(Box::new(move |t| Complex64::new(mid, (2.0 * t - 1.0) * tmax)));
        }
        let mut r = 0.5 * (self.a_minus + mid);
        while contours.len() < 3 {
            contours.push(Box::new(move |t| Complex64::from_polar(r, 2.0 * PI * t + 0.1)));
            r = 0.5 * (r + mid);
        }
        contours.truncate(3);
        let mut out = Vec::with_capacity(3 * per_contour);
        for c in &contours {
            for k in 0..per_contour {
                let t = (k as f64 + 0.5) / per_contour as f64;
                let z = c(t);
                if z.norm() > self.a_minus && !(z.im == 0.0 && z.re >= self.a_plus) {
                    out.push(z);
                }
            }
        }
        out
    }
}

#[derive(Clone)]
pub struct AnalyticFunction {
    pub name: String,
    pub evaluator: Evaluator,
    pub descriptor: AnalyticityDescriptor,
    pub conjugate_symmetric: bool,
}

impl fmt::Debug for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunction")
            .field("name", &self.name)
            .field("descriptor", &self.descriptor)
            .field("conjugate_symmetric", &self.conjugate_symmetric)
            .finish()
    }
}

impl AnalyticFunction {
    pub fn new(
        name: impl Into<String>,
        evaluator: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        descriptor: AnalyticityDescriptor,
        conjugate_symmetric: bool,
    ) -> Self {
        AnalyticFunction { name: name.into(), evaluator: Arc::new(evaluator), descriptor, conjugate_symmetric }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.evaluator)(z)
    }

    /// Set `growth_c` to 1.5 × the largest `|ũ(z)|/(1+|z|)^m` over the domain samples.
    pub fn calibrated(mut self) -> Self {
        let m = self.descriptor.growth_m;
        let peak = self
            .descriptor
            .domain_samples(2000)
            .into_iter()
            .map(|z| self.eval(z).norm() / (1.0 + z.norm()).powf(m))
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        self.descriptor.growth_c = 1.5 * peak.max(f64::MIN_POSITIVE);
        self
    }
}

/// Principal branch `base^p`; NaN when the base sits on the cut `(−∞, 0]`.
#[inline]
pub fn principal_pow(base: Complex64, p: f64) -> Complex64 {
    if base.im == 0.0 && base.re <= 0.0 {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    (base.ln() * p).exp()
}

/// Γ(−ν) through the reflection formula Γ(−ν)Γ(1+ν) = −π / sin(πν).
pub fn gamma_neg(nu: f64) -> f64 {
    -PI / ((PI * nu).sin() * libm::tgamma(1.0 + nu))
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

/// Moment generating function of KoBoL: `exp(μz + cΓ(−ν)((λ−z)^ν − λ^ν))`.
pub fn kobol_mgf(c: f64, nu: f64, lambda: f64, mu: f64) -> Result<AnalyticFunction> {
    if !(c > 0.0) {
        return Err(Error::param("c", format!("must be positive, got {c}")));
    }
    if !(nu > 0.0 && nu < 2.0) || is_integer(nu) {
        return Err(Error::param("nu", format!("must lie in (0,2) and not be an integer, got {nu}")));
    }
    if !(lambda > 1.0) {
        return Err(Error::param("lambda", format!("must exceed 1, got {lambda}")));
    }
    if !mu.is_finite() {
        return Err(Error::param("mu", "not finite"));
    }
    let k = c * gamma_neg(nu);
    let lam = Complex64::new(lambda, 0.0);
    let lam_nu = principal_pow(lam, nu);
    let eval = move |z: Complex64| (z * mu + k * (principal_pow(lam - z, nu) - lam_nu)).exp();
    let (conditions, kind) = if nu < 1.0 {
        if mu == 0.0 {
            let c = Conditions { sinh1: Some(PI), sinh2: Some(PI), sinh3: Some(PI / 2.0), log: Some(0.0) };
            (c, ConditionKind::Sinh1)
        } else if mu > 0.0 {
            let c = Conditions { sinh1: Some(PI / 2.0), sinh2: Some(PI / 2.0), sinh3: None, log: Some(mu) };
            (c, ConditionKind::Sinh1)
        } else {
            (Conditions { log: Some(-mu), ..Default::default() }, ConditionKind::Log)
        }
    } else {
        let gamma = 0.5 * PI * (1.0 - 1.0 / nu).min(3.0 / nu - 1.0);
        (Conditions { sinh3: Some(gamma), ..Default::default() }, ConditionKind::Sinh3)
    };
    let desc = AnalyticityDescriptor::with_conditions(0.0, lambda, conditions, kind);
    let name = format!("kobol(c={c}, nu={nu}, lambda={lambda}, mu={mu})");
    Ok(AnalyticFunction::new(name, eval, desc, true).calibrated())
}

/// Symmetric normal tempered stable: `exp(μz + δ(λ^ν − (λ²−z²)^{ν/2}))`.
pub fn nts_mgf(delta: f64, nu: f64, lambda: f64, mu: f64) -> Result<AnalyticFunction> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    if !(nu > 0.0 && nu < 2.0) {
        return Err(Error::param("nu", format!("must lie in (0,2), got {nu}")));
    }
    if !(lambda > 1.0) {
        return Err(Error::param("lambda", format!("must exceed 1, got {lambda}")));
    }
    if !mu.is_finite() {
        return Err(Error::param("mu", "not finite"));
    }
    let lam2 = Complex64::new(lambda * lambda, 0.0);
    let lam_nu = principal_pow(lam2, nu / 2.0);
    let eval = move |z: Complex64| (z * mu + delta * (lam_nu - principal_pow(lam2 - z * z, nu / 2.0))).exp();
    let gamma = 0.5 * PI * (1.0 / nu).min(1.0);
    let (conditions, kind) = if mu == 0.0 {
        let log = if nu <= 1.0 { Some(0.0) } else { None };
        (Conditions { sinh3: Some(gamma), log, ..Default::default() }, ConditionKind::Sinh3)
    } else if nu > 1.0 {
        (Conditions { sinh3: Some(gamma), log: Some(mu.abs()), ..Default::default() }, ConditionKind::Sinh3)
    } else {
        (Conditions { log: Some(mu.abs()), ..Default::default() }, ConditionKind::Log)
    };
    let desc = AnalyticityDescriptor::with_conditions(0.0, lambda, conditions, kind);
    let name = format!("nts(delta={delta}, nu={nu}, lambda={lambda}, mu={mu})");
    Ok(AnalyticFunction::new(name, eval, desc, true).calibrated())
}

/// Non-symmetric NTS has no implemented deformation rules.
pub fn nts_nonsymmetric_mgf(_delta: f64, _nu: f64, _alpha: f64, _beta: f64, _mu: f64) -> Result<AnalyticFunction> {
    Err(Error::Unsupported("non-symmetric NTS is not implemented".into()))
}

/// `w·e^{μz} + (1−w)·base(z)`.
pub fn atom_mixture(w: f64, mu: f64, base: &AnalyticFunction) -> Result<AnalyticFunction> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::param("w", format!("must lie in [0,1], got {w}")));
    }
    if !mu.is_finite() {
        return Err(Error::param("mu", "not finite"));
    }
    let exp_conditions = if mu == 0.0 {
        Conditions::entire()
    } else if mu > 0.0 {
        Conditions { sinh1: Some(PI / 2.0), sinh2: Some(PI / 2.0), sinh3: None, log: Some(mu) }
    } else {
        Conditions { log: Some(-mu), ..Default::default() }
    };
    let bd = &base.descriptor;
    let (conditions, a_minus, a_plus, m) = if w == 0.0 {
        (bd.conditions, bd.a_minus, bd.a_plus, bd.growth_m)
    } else if w == 1.0 {
        (exp_conditions, 0.0, f64::INFINITY, 0.0)
    } else {
        (bd.conditions.intersect(&exp_conditions), bd.a_minus, bd.a_plus, bd.growth_m.max(0.0))
    };
    let kind = if conditions.holds(bd.kind) && w < 1.0 {
        bd.kind
    } else {
        [ConditionKind::Sinh1, ConditionKind::Sinh2, ConditionKind::Sinh3, ConditionKind::Log]
            .into_iter()
            .find(|k| conditions.holds(*k))
            .unwrap_or(ConditionKind::AnnulusOnly)
    };
    let mut desc = AnalyticityDescriptor::with_conditions(a_minus, a_plus, conditions, kind);
    desc.growth_m = m;
    let f = base.evaluator.clone();
    let eval = move |z: Complex64| {
        let atom = if w == 0.0 { Complex64::new(0.0, 0.0) } else { w * (z * mu).exp() };
        let rest = if w == 1.0 { Complex64::new(0.0, 0.0) } else { (1.0 - w) * f(z) };
        atom + rest
    };
    let name = format!("{w}*exp({mu}z) + {}*{}", 1.0 - w, base.name);
    Ok(AnalyticFunction::new(name, eval, desc, base.conjugate_symmetric).calibrated())
}

/// Argument of the contour arms for a symmetric pair of rays `{e^{iφ}, −e^{iφ}}` kept as far as
/// possible from the pole arguments; ties go to the smallest `|φ|`, then to positive φ.
///
/// The arms of the unrotated Z-SINH3 contour point along `±i` (φ = π/2), so the matching
/// pre-rotation is `φ − π/2`, see [`rotation_for_arms`].
pub fn select_rotation(poles: &[Complex64]) -> Result<f64> {
    if poles.iter().any(|p| (p.norm() - 1.0).abs() < 1e-14) {
        return Err(Error::param("poles", "a pole lies on the unit circle"));
    }
    if poles.is_empty() {
        return Ok(0.0);
    }
    // distance of the antipodal pair depends on arg modulo π
    let mut a: Vec<f64> = poles.iter().map(|p| p.arg().rem_euclid(PI)).collect();
    a.sort_by(|x, y| x.total_cmp(y));
    let mut cands: Vec<(f64, f64)> = Vec::new();
    for i in 0..a.len() {
        let lo = a[i];
        let hi = if i + 1 < a.len() { a[i + 1] } else { a[0] + PI };
        let gap = hi - lo;
        cands.push((0.5 * gap, (0.5 * (lo + hi)).rem_euclid(PI)));
    }
    let best = cands.iter().map(|c| c.0).fold(0.0, f64::max);
    let mut phi_best = f64::NAN;
    for &(g, phi) in &cands {
        if g < best - 1e-12 {
            continue;
        }
        // representatives of the class modulo π inside [−π, π)
        for cand in [phi, phi - PI] {
            let better = phi_best.is_nan()
                || cand.abs() < phi_best.abs() - 1e-12
                || ((cand.abs() - phi_best.abs()).abs() <= 1e-12 && cand > phi_best);
            if better {
                phi_best = cand;
            }
        }
    }
    Ok(phi_best)
}

/// Pre-rotation angle for the Z-SINH3 engine that sends its arms to direction `arms`.
pub fn rotation_for_arms(arms: f64) -> f64 {
    arms - PI / 2.0
}
