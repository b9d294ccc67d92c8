//! Closed-form kernels: the Gauss-Weierstrass kernel, the single-scale
//! fractional Poisson kernel, the kernel of `T_N^alpha`, and the parabolic metric.
//!
//! Every exponential is assembled in log space and exponentiated once, so far
//! tails come out as exact zeros instead of `0 * inf`.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::sequences::log_scale_term;
use crate::transforms::spec::{check_alpha, TransformSpec};

/// A space-time offset `(y, s)` together with a scale `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPoint {
    pub y: Vec<f64>,
    pub s: f64,
    pub tau: f64,
}

impl KernelPoint {
    pub fn new(y: Vec<f64>, s: f64, tau: f64) -> Self {
        Self { y, s, tau }
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y_norm2(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum()
    }
}

/// `B(x0, r) x [t0 - r^2, t0 + r^2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicCylinder {
    pub center: Vec<f64>,
    pub t0: f64,
    pub radius: f64,
}

impl ParabolicCylinder {
    pub fn new(center: Vec<f64>, t0: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("cylinder radius must be positive, got {radius}")));
        }
        Ok(Self { center, t0, radius })
    }

    pub fn contains(&self, x: &[f64], t: f64) -> bool {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 <= self.radius * self.radius && (t - self.t0).abs() <= self.radius * self.radius
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("spatial dimension must be 1 or 2, got {n}")))
    }
}

/// `1 / (4^alpha Gamma(alpha))`.
pub fn poisson_constant(alpha: f64) -> f64 {
    (-ln_poisson_constant_inv(alpha)).exp()
}

fn ln_poisson_constant_inv(alpha: f64) -> f64 {
    alpha * 4f64.ln() + ln_gamma(alpha)
}

/// Log of the spatial factor `(4 pi s)^{-n/2} e^{-|y|^2/(4s)}`.
#[inline]
pub(crate) fn ln_gauss(r2: f64, s: f64, n: usize) -> f64 {
    -r2 / (4.0 * s) - 0.5 * n as f64 * (4.0 * PI * s).ln()
}

/// `(4 pi tau)^{-n/2} exp(-|y|^2 / (4 tau))` with `n = y.len()`.
pub fn gauss_weierstrass(y: &[f64], tau: f64) -> Result<f64> {
    check_dim(y.len())?;
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let r2: f64 = y.iter().map(|v| v * v).sum();
    Ok(ln_gauss(r2, tau, y.len()).exp())
}

/// Single-scale kernel of `P_tau^alpha`:
/// `tau^{2a}/(4^a Gamma(a)) e^{-(tau^2+|y|^2)/(4s)} (4 pi s)^{-n/2} s^{-1-a}`, zero for `s <= 0`.
pub fn fractional_poisson_kernel(p: &KernelPoint, alpha: f64) -> Result<f64> {
    check_dim(p.n())?;
    check_alpha(alpha)?;
    if !(p.tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {}", p.tau)));
    }
    if p.s <= 0.0 {
        return Ok(0.0);
    }
    let ln = -ln_poisson_constant_inv(alpha) + log_scale_term(p.tau, alpha, p.s) + ln_gauss(p.y_norm2(), p.s, p.n());
    Ok(ln.exp())
}

/// Time weight of the subordination: `w_tau(s) = tau^{2a}/(4^a Gamma(a)) e^{-tau^2/(4s)} s^{-1-a}`.
pub fn subordination_weight(tau: f64, alpha: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    (-ln_poisson_constant_inv(alpha) + log_scale_term(tau, alpha, s)).exp()
}

/// Kernel of `T_N^alpha` at `(p.y, p.s)`; `p.tau` is ignored.
pub fn diff_transform_kernel(p: &KernelPoint, spec: &TransformSpec) -> f64 {
    if p.s <= 0.0 {
        return 0.0;
    }
    let shift = -ln_poisson_constant_inv(spec.alpha()) + ln_gauss(p.y_norm2(), p.s, p.n());
    telescoped(spec, p.s, shift)
}

/// `K_N^alpha(y, s) / W(y, s)`: the time profile shared by every `y`.
pub fn diff_time_weight(spec: &TransformSpec, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    telescoped(spec, s, -ln_poisson_constant_inv(spec.alpha()))
}

fn telescoped(spec: &TransformSpec, s: f64, shift: f64) -> f64 {
    let alpha = spec.alpha();
    let mut prev = (log_scale_term(spec.a().a(spec.n1()), alpha, s) + shift).exp();
    let mut sum = 0.0;
    for j in spec.n1()..=spec.n2() {
        let next = (log_scale_term(spec.a().a(j + 1), alpha, s) + shift).exp();
        sum += spec.v().v(j) * (next - prev);
        prev = next;
    }
    sum
}

/// `max(|x - y|, |t - s|^{1/2})`.
pub fn parabolic_distance(p1: (&[f64], f64), p2: (&[f64], f64)) -> f64 {
    let d2: f64 = p1.0.iter().zip(p2.0).map(|(a, b)| (a - b) * (a - b)).sum();
    d2.sqrt().max((p1.1 - p2.1).abs().sqrt())
}
