//! Conformal maps for contour deformation.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::util::{bisect, gauss_legendre};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `χ(y) = σ + i·b·sinh(iω + y)` together with the half-width of its strip of analyticity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinhContour {
    pub sigma: f64,
    pub b: f64,
    pub omega: f64,
    pub d_half: f64,
}

/// Real-axis crossings of the two strip edges and the smallest distance of the strip image to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripImage {
    pub r_minus: f64,
    pub r_plus: f64,
    pub origin_distance: f64,
}

impl SinhContour {
    pub fn new(sigma: f64, b: f64, omega: f64, d_half: f64) -> Result<Self> {
        let c = SinhContour { sigma, b, omega, d_half };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::param("b", format!("must be positive, got {}", self.b)));
        }
        if !(self.omega.abs() < PI / 2.0) {
            return Err(Error::param("omega", format!("|omega| must be < pi/2, got {}", self.omega)));
        }
        if !(self.d_half >= 0.0 && self.d_half < PI / 2.0 - self.omega.abs()) {
            return Err(Error::param(
                "d_half",
                format!("need 0 <= d < pi/2 - |omega|, got d={} omega={}", self.d_half, self.omega),
            ));
        }
        if !self.sigma.is_finite() {
            return Err(Error::param("sigma", "not finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn map(&self, y: f64) -> Complex64 {
        sinh_curve(self.sigma, self.b, self.omega, y)
    }

    /// dχ/dy.
    #[inline]
    pub fn derivative(&self, y: f64) -> Complex64 {
        I * self.b * Complex64::new(y, self.omega).cosh()
    }

    /// Image of the line `Im y = ±d`, i.e. the curve with angle `ω ± d`.
    pub fn edge(&self, upper: bool, y: f64) -> Complex64 {
        let w = if upper { self.omega + self.d_half } else { self.omega - self.d_half };
        sinh_curve(self.sigma, self.b, w, y)
    }

    pub fn strip_image(&self) -> StripImage {
        let a = self.sigma - self.b * (self.omega + self.d_half).sin();
        let c = self.sigma - self.b * (self.omega - self.d_half).sin();
        StripImage { r_minus: a.min(c), r_plus: a.max(c), origin_distance: self.strip_origin_distance() }
    }

    /// Smallest distance from 0 to the closed strip image, taken over both edges.
    pub fn strip_origin_distance(&self) -> f64 {
        curve_origin_distance(self.sigma, self.b, self.omega + self.d_half).min(curve_origin_distance(
            self.sigma,
            self.b,
            self.omega - self.d_half,
        ))
    }

    /// Conjugate symmetric about the real axis: `χ(−y) = conj χ(y)`. Always true for real parameters.
    pub fn is_conjugate_symmetric(&self) -> bool {
        true
    }
}

#[inline]
fn sinh_curve(sigma: f64, b: f64, omega: f64, y: f64) -> Complex64 {
    Complex64::new(sigma, 0.0) + I * b * Complex64::new(y, omega).sinh()
}

pub fn sinh_map(c: &SinhContour, y: f64) -> Complex64 {
    c.map(y)
}

pub fn sinh_map_derivative(c: &SinhContour, y: f64) -> Complex64 {
    c.derivative(y)
}

/// Distance to the origin of the curve `σ + i b sinh(iθ + y)`, y real.
///
/// Along the curve `|z|² = σ² − 2σb·sinθ·u + b²u² − b²cos²θ` with `u = cosh y ≥ 1`.
pub fn curve_origin_distance(sigma: f64, b: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    if b > 0.0 && sigma * s > b {
        c * (sigma * sigma - b * b).sqrt()
    } else {
        (sigma - b * s).abs()
    }
}

/// Distance to the origin of the contour center (`at_strip_edge = false`) or of the
/// edge nearest the origin (`at_strip_edge = true`).
pub fn origin_distance(c: &SinhContour, at_strip_edge: bool) -> f64 {
    if at_strip_edge {
        c.strip_origin_distance()
    } else {
        curve_origin_distance(c.sigma, c.b, c.omega)
    }
}

/// Solve for (σ, b) so that the edges `ω+d` and `ω−d` cross the real axis at `r₋` and `r₊`.
pub fn fit_sinh_to_interval(r_minus: f64, r_plus: f64, omega: f64, d_half: f64) -> Result<(f64, f64)> {
    if !(r_minus > 0.0 && r_minus < r_plus) {
        return Err(Error::param("r_minus", format!("need 0 < r_minus < r_plus, got {r_minus}, {r_plus}")));
    }
    let den = 2.0 * omega.cos() * d_half.sin();
    if !(den.abs() > 1e-300) || d_half <= 0.0 {
        return Err(Error::param("d_half", "degenerate fit: cos(omega)·sin(d) vanishes"));
    }
    let b = (r_plus - r_minus) / den;
    let sigma = (r_plus * (omega + d_half).sin() - r_minus * (omega - d_half).sin()) / den;
    Ok((sigma, b))
}

/// Fitted contour in one call.
pub fn fitted_contour(r_minus: f64, r_plus: f64, omega: f64, d_half: f64) -> Result<SinhContour> {
    let (sigma, b) = fit_sinh_to_interval(r_minus, r_plus, omega, d_half)?;
    SinhContour::new(sigma, b, omega, d_half)
}

/// `r₋(1 − sin(ω+d)sin(ω−d)) < r₊(1 − sin²(ω+d))`.
pub fn admissible_rpm(r_minus: f64, r_plus: f64, omega: f64, d_half: f64) -> bool {
    let sp = (omega + d_half).sin();
    let sm = (omega - d_half).sin();
    r_minus * (1.0 - sp * sm) < r_plus * (1.0 - sp * sp)
}

/// `ω = √(9/48)·√δ`, `d = 2ω/3`.
pub fn small_angle_params(delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    let omega = (9.0f64 / 48.0).sqrt() * delta.sqrt();
    Ok((omega, 2.0 * omega / 3.0))
}

/// Length of the part of the contour inside the open unit disc.
pub fn arc_length_inside_unit_disc(c: &SinhContour) -> f64 {
    let (s, co) = c.omega.sin_cos();
    let disc = 1.0 + co * co * (c.b * c.b - c.sigma * c.sigma);
    if disc <= 0.0 {
        return 0.0;
    }
    let root = disc.sqrt();
    let u1 = ((c.sigma * s - root) / c.b).max(1.0);
    let u2 = (c.sigma * s + root) / c.b;
    if u2 <= u1 {
        return 0.0;
    }
    let (y1, y2) = (u1.acosh(), u2.acosh());
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, w) = RULE.get_or_init(|| gauss_legendre(64));
    let half = 0.5 * (y2 - y1);
    let mid = 0.5 * (y2 + y1);
    let len: f64 = x
        .iter()
        .zip(w)
        .map(|(&t, &wt)| {
            let y = mid + half * t;
            wt * c.b * (y.sinh().powi(2) + co * co).sqrt()
        })
        .sum();
    2.0 * half * len
}

/// `z(y) = σ + i·y·ln(A + y²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogContour {
    pub sigma: f64,
    pub a: f64,
}

impl LogContour {
    pub fn new(sigma: f64, a: f64) -> Result<Self> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::param("A", format!("must exceed 1, got {a}")));
        }
        Ok(LogContour { sigma, a })
    }

    #[inline]
    pub fn map(&self, y: f64) -> Complex64 {
        Complex64::new(self.sigma, y * (self.a + y * y).ln())
    }

    /// Imaginary part of dz/dy.
    #[inline]
    pub fn derivative(&self, y: f64) -> f64 {
        let q = self.a + y * y;
        q.ln() + 2.0 * y * y / q
    }

    /// Map evaluated at complex argument, used to locate the strip edges.
    pub fn map_complex(&self, y: Complex64) -> Complex64 {
        Complex64::new(self.sigma, 0.0) + I * y * (self.a + y * y).ln()
    }
}

pub fn log_map(c: &LogContour, y: f64) -> Complex64 {
    c.map(y)
}

pub fn log_map_derivative(c: &LogContour, y: f64) -> f64 {
    c.derivative(y)
}

/// σ = (r₊+r₋)/2, A = 1+(r₊−r₋)^{1/4}, and the strip half-width d solving σ + d·ln(A−d²) = r₊.
pub fn fit_log_to_interval(r_minus: f64, r_plus: f64) -> Result<(LogContour, f64)> {
    if !(r_minus > 0.0 && r_minus < r_plus) {
        return Err(Error::param("r_minus", format!("need 0 < r_minus < r_plus, got {r_minus}, {r_plus}")));
    }
    let sigma = 0.5 * (r_plus + r_minus);
    let a = 1.0 + (r_plus - r_minus).powf(0.25);
    let c = LogContour::new(sigma, a)?;
    let hi = 0.5 * (a - 1.0).sqrt();
    let f = |d: f64| sigma + d * (a - d * d).ln() - r_plus;
    if f(hi) < 0.0 {
        return Err(Error::param("r_plus", "log strip cannot reach r_plus"));
    }
    let d = bisect(f, 0.0, hi, 1e-15)?;
    Ok((c, d))
}

#[cfg(test)]
#[allow(clippy::approx_constant)]
mod tests {
    use super::*;

    #[test]
    fn fit_reproduces_tabulated_parameters() {
        let (s, b) = fit_sinh_to_interval(0.98, 1.0, -0.7854, 0.7069).unwrap();
        assert!((s - 0.978291504).abs() < 2e-6, "{s}");
        assert!((b - 0.021775623).abs() < 2e-6, "{b}");
        let (s, b) = fit_sinh_to_interval(0.98, 1.0, 0.0612, 0.0408).unwrap();
        assert!((s - 1.005).abs() < 1e-3, "{s}");
        assert!((b - 0.245).abs() < 1e-3, "{b}");
    }

    #[test]
    fn fit_with_zero_omega_is_symmetric() {
        let eps = 1e-3;
        let (s, b) = fit_sinh_to_interval(0.5, 0.5 + 2.0 * eps, 0.0, PI / 4.0).unwrap();
        assert!((s - (0.5 + eps)).abs() < 1e-15);
        assert!((b - eps * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fit_rejects_bad_intervals() {
        assert!(fit_sinh_to_interval(1.0, 0.98, 0.0, 0.3).is_err());
        assert!(fit_sinh_to_interval(0.9, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn fit_edges_recover_interval() {
        let c = fitted_contour(0.98, 1.0, -0.7, 0.6).unwrap();
        let e1 = c.edge(true, 0.0);
        let e2 = c.edge(false, 0.0);
        assert!((e1.re - 0.98).abs() < 1e-14 && e1.im == 0.0);
        assert!((e2.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sinh_map_center_and_crossing() {
        let c = SinhContour::new(0.0, 1.0, 0.0, 0.5).unwrap();
        assert_eq!(c.map(0.0), Complex64::new(0.0, 0.0));
        assert_eq!(c.derivative(0.0), Complex64::new(0.0, 1.0));
        let c = SinhContour::new(0.978291504, 0.021775623, -0.7854, 0.7).unwrap();
        assert!((c.map(0.0).re - 0.99368).abs() < 1e-5);
    }

    #[test]
    fn sinh_map_matches_taylor_series() {
        let c = SinhContour::new(1.0, 2.0, PI / 6.0, 0.1).unwrap();
        let w = Complex64::new(1.0, PI / 6.0);
        let mut term = w;
        let mut s = w;
        for k in 1..20 {
            term = term * w * w / ((2 * k) as f64 * (2 * k + 1) as f64);
            s += term;
        }
        let expect = Complex64::new(1.0, 0.0) + I * 2.0 * s;
        assert!((c.map(1.0) - expect).norm() < 1e-14);
    }

    #[test]
    fn small_angle_rule() {
        let (w, d) = small_angle_params(0.02).unwrap();
        assert!((w - 0.0612).abs() < 1e-4 && (d - 0.0408).abs() < 1e-4);
        // (ω+d)² − r₋(ω²−d²) ≈ δ/2 holds to leading order only
        let delta = 0.04;
        let (w, d) = small_angle_params(delta).unwrap();
        let rm = 1.0 - delta;
        let lhs = (w + d).powi(2) - rm * (w * w - d * d);
        assert!((lhs / (delta / 2.0) - 1.0).abs() < 0.2, "{lhs}");
        assert!(small_angle_params(0.0).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(admissible_rpm(0.98, 1.0, 0.3, -0.3));
        assert!(admissible_rpm(0.98, 1.0, 0.0612, 0.0408));
        let (rm, rp, w, d): (f64, f64, f64, f64) = (0.999, 1.0, 0.3, 0.2);
        let lhs = rm * (1.0 - (w + d).sin() * (w - d).sin());
        let rhs = rp * (1.0 - (w + d).sin().powi(2));
        assert_eq!(admissible_rpm(rm, rp, w, d), lhs < rhs);
        assert!(!admissible_rpm(rm, rp, w, d));
    }

    #[test]
    fn origin_distances() {
        let c = SinhContour { sigma: 1.0, b: 0.0, omega: 0.3, d_half: 0.1 };
        assert_eq!(origin_distance(&c, false), 1.0);
        let c = fitted_contour(0.98, 1.0, -0.7854, 0.7069).unwrap();
        let r = origin_distance(&c, false);
        assert!(r > 0.98 && r < 1.0);
        let c = fitted_contour(0.98, 1.0, 0.0612, 0.0408).unwrap();
        let r = origin_distance(&c, true);
        assert!(r > 0.98 - 1e-12 && r < 1.0, "{r}");
    }

    #[test]
    fn general_distance_matches_sampling() {
        let c = fitted_contour(0.98, 1.0, 0.0, 0.9 * PI / 6.0).unwrap();
        let mut best = f64::INFINITY;
        for k in -40000..=40000 {
            best = best.min(c.edge(true, k as f64 * 1e-4).norm()).min(c.edge(false, k as f64 * 1e-4).norm());
        }
        assert!((best - c.strip_origin_distance()).abs() < 1e-9, "{best} {}", c.strip_origin_distance());
    }

    #[test]
    fn arc_length_matches_brute_force() {
        let c = fitted_contour(0.98, 1.0, 0.0612, 0.0408).unwrap();
        let h = 1e-5;
        let mut len = 0.0;
        let mut y = -20.0;
        while y < 20.0 {
            if c.map(y + 0.5 * h).norm() < 1.0 {
                len += (c.map(y + h) - c.map(y)).norm();
            }
            y += h;
        }
        assert!((arc_length_inside_unit_disc(&c) - len).abs() < 1e-6);
        let c = SinhContour::new(2.0, 0.1, -0.5, 0.2).unwrap();
        assert_eq!(arc_length_inside_unit_disc(&c), 0.0);
    }

    #[test]
    fn log_map_basics() {
        let c = LogContour::new(1.0, 2.0).unwrap();
        assert_eq!(c.map(0.0), Complex64::new(1.0, 0.0));
        assert!((c.derivative(0.0) - 2f64.ln()).abs() < 1e-16);
        let (c, d) = fit_log_to_interval(0.98, 1.0).unwrap();
        assert!((c.sigma - 0.99).abs() < 1e-15);
        assert!((c.a - 1.3761).abs() < 1e-4);
        assert!((c.map_complex(Complex64::new(0.0, -d)).re - 1.0).abs() < 1e-13);
        assert!(LogContour::new(0.5, 1.0).is_err());
    }
}
