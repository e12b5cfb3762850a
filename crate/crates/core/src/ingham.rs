//! One-dimensional Ingham kernels K = (1 + D²)(H∗H) with
//! H(x) = cos(πx/r)·1{|x| < r/2}, the lower Riesz constant they certify on
//! [−1, 1], and the Bessel-root bound for balls.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Verdict};
use crate::error::{CertError, Result};
use crate::special::{self, sinc};

/// Kernel supported on (−r, r), built for the spectrum [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InghamKernel {
    pub r: f64,
    /// K(0).
    pub k0: f64,
    /// max over ℝ of K̂.
    pub b: f64,
    /// Point where K̂ attains b.
    pub t_max: f64,
}

impl InghamKernel {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > PI) {
            return Err(CertError::NoKernel(format!("support half-width r = {r} must exceed π")));
        }
        let mut k = InghamKernel { r, k0: 0.0, b: 0.0, t_max: 0.0 };
        k.k0 = k.eval(0.0);
        let (t, b) = k.transform_max();
        k.t_max = t;
        k.b = b;
        Ok(k)
    }

    fn a(&self) -> f64 {
        PI / self.r
    }

    /// (H∗H)(x).
    pub fn h_conv(&self, x: f64) -> f64 {
        let x = x.abs();
        if x >= self.r {
            return 0.0;
        }
        let a = self.a();
        0.5 * (self.r - x) * (a * x).cos() + (a * x).sin() / (2.0 * a)
    }

    /// K(x) = (H∗H)(x) + (H∗H)''(x).
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if x >= self.r {
            return 0.0;
        }
        let a = self.a();
        0.5 * (self.r - x) * (a * x).cos() * (1.0 - a * a) + (a * x).sin() * (0.5 / a + 0.5 * a)
    }

    /// Ĥ(t) = ∫ H(x) e^{−ixt} dx.
    pub fn h_hat(&self, t: f64) -> f64 {
        let a = self.a();
        let hr = 0.5 * self.r;
        hr * (sinc((a - t) * hr) + sinc((a + t) * hr))
    }

    /// K̂(t) = ∫ K(x) e^{−ixt} dx = (1 − t²) Ĥ(t)².
    pub fn transform(&self, t: f64) -> f64 {
        let h = self.h_hat(t);
        (1.0 - t * t) * h * h
    }

    fn transform_max(&self) -> (f64, f64) {
        // K̂ ≤ 0 off [−1, 1] and K̂ is even
        let m = 2000;
        let mut best = (0.0, self.transform(0.0));
        for i in 1..=m {
            let t = i as f64 / m as f64;
            let v = self.transform(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        let h = 1.0 / m as f64;
        let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(1.0));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if self.transform(x1) >= self.transform(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let t = 0.5 * (lo + hi);
        let v = self.transform(t);
        if v > best.1 {
            (t, v)
        } else {
            best
        }
    }

    /// Certified lower Riesz constant on [−1, 1] for node separation > r.
    pub fn riesz_lower(&self) -> f64 {
        2.0 * PI * self.k0 / self.b
    }

    /// CSV of (x, K(x)) on [−xmax, xmax].
    pub fn kernel_csv(&self, xmax: f64, points: usize) -> String {
        let mut s = String::from("x,K\n");
        for i in 0..points {
            let x = -xmax + 2.0 * xmax * i as f64 / (points.max(2) - 1) as f64;
            let _ = writeln!(s, "{:.16e},{:.16e}", x, self.eval(x));
        }
        s
    }

    /// CSV of (t, K̂(t)) on [−tmax, tmax].
    pub fn transform_csv(&self, tmax: f64, points: usize) -> String {
        let mut s = String::from("t,K_hat\n");
        for i in 0..points {
            let t = -tmax + 2.0 * tmax * i as f64 / (points.max(2) - 1) as f64;
            let _ = writeln!(s, "{:.16e},{:.16e}", t, self.transform(t));
        }
        s
    }
}

pub fn build_ingham_kernel(r: f64) -> Result<InghamKernel> {
    InghamKernel::new(r)
}

/// Certificate that every node set with separation ≥ delta is an
/// interpolation set on [−1, 1], with lower Riesz constant 2πK(0)/b.
pub fn interpolation_constant(kernel: &InghamKernel, delta: f64) -> Result<Certificate> {
    if !(delta > kernel.r) {
        return Err(CertError::NotApplicable(format!(
            "separation {delta} must exceed the kernel support half-width {}",
            kernel.r
        )));
    }
    let c = kernel.riesz_lower();
    let mut cert = Certificate::new("ingham_interpolation");
    cert.finding(
        "interpolation",
        Verdict::Proved,
        "proved",
        format!("every node set with separation >= {delta} is an interpolation set on [-1, 1]"),
    );
    cert.constant("r", kernel.r);
    cert.constant("delta", delta);
    cert.constant("k0", kernel.k0);
    cert.constant("b", kernel.b);
    cert.constant("lower_riesz_constant", c);
    cert.note("transform convention: K_hat(t) = integral of K(x) exp(-ixt) dx");
    cert.note(
        "for an interval S of half-length L, separation delta/L suffices and the constant becomes L times the value above",
    );
    Ok(cert)
}

/// Lower Riesz constant for the interval [−L, L] and node separation
/// δ > r/L, obtained by rescaling the [−1, 1] result.
pub fn rescaled_constant(kernel: &InghamKernel, half_length: f64) -> f64 {
    half_length * kernel.riesz_lower()
}

/// First positive zero of J_order.
pub fn bessel_first_root(order: f64) -> Result<f64> {
    if !(0.0..=40.0).contains(&order) {
        return Err(CertError::InvalidSpec(format!("order {order} outside [0, 40]")));
    }
    special::bessel_first_root(order)
}

/// 2ν_n with ν_n the first zero of J_{n/2−1}: separation above this makes
/// any node set an interpolation set for the unit ball in ℝⁿ.
pub fn ball_ingham_bound(n: usize) -> Result<f64> {
    if !(1..=80).contains(&n) {
        return Err(CertError::InvalidSpec(format!("dimension {n} outside 1..=80")));
    }
    Ok(2.0 * special::bessel_first_root(n as f64 / 2.0 - 1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    #[test]
    fn no_kernel_at_pi() {
        assert!(matches!(InghamKernel::new(PI), Err(CertError::NoKernel(_))));
        assert!(InghamKernel::new(PI * 1.0001).is_ok());
    }

    #[test]
    fn convolution_matches_quadrature() {
        for &r in &[1.05 * PI, 1.5 * PI, 2.0 * PI] {
            let k = InghamKernel::new(r).unwrap();
            let a = PI / r;
            for i in 0..1000 {
                let x = -1.1 * r + 2.2 * r * i as f64 / 999.0;
                let lo = (x - r / 2.0).max(-r / 2.0);
                let hi = (x + r / 2.0).min(r / 2.0);
                let q = if hi > lo {
                    adaptive(|s| (a * s).cos() * (a * (x - s)).cos(), lo, hi, 1e-13)
                        .unwrap()
                        .value
                } else {
                    0.0
                };
                assert!((k.h_conv(x) - q).abs() < 1e-10, "r={r} x={x}");
            }
        }
    }

    #[test]
    fn second_derivative_by_differences() {
        let k = InghamKernel::new(1.3 * PI).unwrap();
        let h = 1e-4;
        for &x in &[0.3, 1.0, 2.2, 3.5] {
            let d2 = (k.h_conv(x + h) - 2.0 * k.h_conv(x) + k.h_conv(x - h)) / (h * h);
            assert!((k.eval(x) - k.h_conv(x) - d2).abs() < 1e-6);
        }
    }

    #[test]
    fn transform_matches_quadrature() {
        let k = InghamKernel::new(2.0 * PI).unwrap();
        for &t in &[0.0, 0.4, 0.5, 1.0, 3.7, 12.0] {
            let q = adaptive(|x| 2.0 * k.eval(x) * (x * t).cos(), 0.0, k.r, 1e-12)
                .unwrap()
                .value;
            assert!((k.transform(t) - q).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn support_and_sign() {
        for &r in &[1.05 * PI, 1.2 * PI, 1.5 * PI, 2.0 * PI] {
            let k = InghamKernel::new(r).unwrap();
            assert!(k.k0 > 0.0);
            for i in 0..=1000 {
                let x = r + i as f64 * 0.01;
                assert!(k.eval(x).abs() <= 1e-9 * k.k0);
                assert!(k.eval(-x).abs() <= 1e-9 * k.k0);
            }
            for i in 0..10_000 {
                let t = 1.0 + 49.0 * i as f64 / 9_999.0;
                assert!(k.transform(t) <= 1e-9 * k.b);
            }
        }
    }

    #[test]
    fn constant_requires_separation_above_r() {
        let k = InghamKernel::new(1.05 * PI).unwrap();
        let c = interpolation_constant(&k, 1.06 * PI).unwrap();
        assert!(c.get("lower_riesz_constant").unwrap() > 0.0);
        let k = InghamKernel::new(1.01 * PI).unwrap();
        assert!(matches!(interpolation_constant(&k, PI), Err(CertError::NotApplicable(_))));
    }

    #[test]
    fn bessel_bounds() {
        assert!((bessel_first_root(0.5).unwrap() - PI).abs() < 1e-9);
        assert!((ball_ingham_bound(3).unwrap() - 2.0 * PI).abs() < 1e-9);
        assert!((ball_ingham_bound(2).unwrap() - 4.80965).abs() < 1e-5);
        assert!(ball_ingham_bound(0).is_err());
        assert!(ball_ingham_bound(81).is_err());
    }
}
