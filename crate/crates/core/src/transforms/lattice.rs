//! The sampled, mass-normalized Gaussian on the grid lattice and its symbol.
//!
//! On a lattice of spacing `dx` the heat kernel at time `s` is taken to be
//! `W(m dx, s) dx / Z(s)` with `Z(s) = sum_m W(m dx, s) dx`, so constants are
//! preserved exactly. Its symbol at `theta in [-pi, pi]` is evaluated either
//! from the spatial sum (small `s`) or from the Poisson-summed theta series.

use std::f64::consts::PI;

use crate::kernels::ln_gauss;

/// Exponent below which terms are dropped (`e^{-41} < 1e-17`).
const CUT: f64 = 41.0;

/// Symbol of the one-dimensional lattice Gaussian at angle `theta`.
pub fn lattice_symbol(theta: f64, s: f64, dx: f64) -> f64 {
    let q = dx * dx / (4.0 * s);
    if q >= 1.0 {
        let m_max = (CUT / q).sqrt().ceil() as i64 + 1;
        let mut num = 1.0;
        let mut den = 1.0;
        for m in 1..=m_max {
            let w = (-q * (m * m) as f64).exp();
            num += 2.0 * w * (m as f64 * theta).cos();
            den += 2.0 * w;
        }
        num / den
    } else {
        let b = s / (dx * dx);
        let k_max = (((CUT / b).sqrt() + PI) / (2.0 * PI)).ceil() as i64 + 1;
        let mut num = 0.0;
        let mut den = 0.0;
        for k in -k_max..=k_max {
            let shift = 2.0 * PI * k as f64;
            num += (-b * (theta + shift) * (theta + shift)).exp();
            den += (-b * shift * shift).exp();
        }
        num / den
    }
}

/// `Z(s) = sum_m W(m dx, s) dx` for the one-dimensional Gaussian.
pub fn lattice_mass(s: f64, dx: f64) -> f64 {
    let q = dx * dx / (4.0 * s);
    if q >= 1.0 {
        let m_max = (CUT / q).sqrt().ceil() as i64 + 1;
        let mut sum = 0.0;
        for m in -m_max..=m_max {
            let y = m as f64 * dx;
            sum += ln_gauss(y * y, s, 1).exp() * dx;
        }
        sum
    } else {
        // Poisson summation: sum_m W(m dx, s) dx = sum_k e^{-s (2 pi k / dx)^2}.
        let b = s / (dx * dx);
        let k_max = ((CUT / b).sqrt() / (2.0 * PI)).ceil() as i64 + 1;
        let mut sum = 1.0;
        for k in 1..=k_max {
            let shift = 2.0 * PI * k as f64;
            sum += 2.0 * (-b * shift * shift).exp();
        }
        sum
    }
}

/// Normalized one-dimensional weights `g_m`, `m = -L..=L`, returned with `L`.
pub fn lattice_weights(s: f64, dx: f64) -> (Vec<f64>, usize) {
    let q = dx * dx / (4.0 * s);
    let half = ((CUT / q).sqrt().ceil() as usize).max(1);
    let raw: Vec<f64> = (-(half as i64)..=half as i64)
        .map(|m| (-q * (m * m) as f64).exp())
        .collect();
    let z: f64 = raw.iter().sum();
    (raw.into_iter().map(|w| w / z).collect(), half)
}

/// Angle of FFT bin `q` out of `p`, folded into `[0, pi]` (the symbol is even).
pub(crate) fn bin_angle(class: usize, p: usize) -> f64 {
    2.0 * PI * class as f64 / p as f64
}

/// `min(q, p - q)`: the symmetry class of FFT bin `q`.
pub(crate) fn bin_class(q: usize, p: usize) -> usize {
    q.min(p - q)
}
