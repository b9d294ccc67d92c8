//! Closed-form band integrals for the divergence example. Every piece reduces to
//! `int_{u1}^{u2} e^{-1/(4u)} u^{-a-1} du`, an incomplete gamma difference.

use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};

use crate::error::{Error, Result};

/// `int_{u1}^{u2} e^{-1/(4u)} u^{-a-1} du` for `0 <= u1 <= u2 <= inf`.
///
/// With `v = 1/(4u)` this is `4^a Gamma(a) (P(a, 1/(4 u1)) - P(a, 1/(4 u2)))`;
/// the upper regularized gamma is used when both endpoints sit in its tail and
/// the power series when both are below 1 (statrs rounds `P(a, x)` to 0 for tiny `x`).
pub fn band_mass(alpha: f64, u1: f64, u2: f64) -> f64 {
    if !(u2 > u1) || u2 <= 0.0 {
        return 0.0;
    }
    let v1 = if u1 <= 0.0 { f64::INFINITY } else { 0.25 / u1 };
    let v2 = if u2.is_infinite() { 0.0 } else { 0.25 / u2 };
    if !v2.is_finite() {
        return 0.0;
    }
    if v1 <= 1.0 {
        return 4f64.powf(alpha) * lower_gamma_difference(alpha, v1, v2).max(0.0);
    }
    let scale = 4f64.powf(alpha) * gamma(alpha);
    let diff = if v2 > alpha + 1.0 {
        let q1 = if v1.is_infinite() { 0.0 } else { gamma_ur(alpha, v1) };
        gamma_ur(alpha, v2) - q1
    } else {
        let p1 = if v1.is_infinite() { 1.0 } else { gamma_lr(alpha, v1) };
        let p2 = if v2 == 0.0 { 0.0 } else { gamma_lr(alpha, v2) };
        p1 - p2
    };
    scale * diff.max(0.0)
}

/// `int_{v2}^{v1} e^{-v} v^{a-1} dv` for `0 <= v2 < v1 <= 1`, from
/// `gamma(a, v) = sum_n (-1)^n v^{a+n} / (n! (a+n))`.
fn lower_gamma_difference(alpha: f64, v1: f64, v2: f64) -> f64 {
    let (mut p1, mut p2) = (v1.powf(alpha), v2.powf(alpha));
    let mut fact = 1.0;
    let mut total = 0.0;
    for n in 0..60 {
        let term = (p1 - p2) / (fact * (alpha + n as f64));
        total += if n % 2 == 0 { term } else { -term };
        if term.abs() <= 1e-17 * total.abs() {
            break;
        }
        p1 *= v1;
        p2 *= v2;
        fact *= (n + 1) as f64;
    }
    total
}

/// Total mass `4^a Gamma(a)` of the weight `e^{-1/(4u)} u^{-a-1}`.
pub fn weight_total(alpha: f64) -> f64 {
    4f64.powf(alpha) * gamma(alpha)
}

/// Index `k` with `a^{2k} <= -t < a^{2k+1}`, or `None` when `t` sits in a gap or `t >= 0`.
fn divergence_band(a: f64, t: f64) -> Option<i64> {
    if !(t < 0.0) {
        return None;
    }
    let guess = ((-t).ln() / a.ln() / 2.0).floor() as i64;
    (guess - 1..=guess + 1).find(|&k| {
        let lo = a.powi(2 * k as i32);
        let hi = a.powi(2 * k as i32 + 1);
        lo <= -t && -t < hi
    })
}

/// `g(t) = sum_k (-1)^k chi_{(-a^{2k+1}, -a^{2k}]}(t)`.
pub fn divergence_profile(a: f64, t: f64) -> f64 {
    match divergence_band(a, t) {
        Some(k) if k % 2 == 0 => 1.0,
        Some(_) => -1.0,
        None => 0.0,
    }
}

/// `int_0^inf e^{-1/(4u)} u^{-a-1} g(t - scale u) chi_{lo < t - scale u < hi} du`,
/// summed band by band. Bands whose weight is below `1e-18` relative are dropped.
pub(crate) fn band_sum_in(a: f64, alpha: f64, t: f64, scale: f64, lo: f64, hi: f64) -> f64 {
    // tau = t - scale u ranges over (lo, min(hi, t)).
    let top = hi.min(t);
    if !(top > lo) {
        return 0.0;
    }
    let ln_a = a.ln();
    // Smallest band: a^{2k+1} below 1e-18 scale.
    let k_lo = ((1e-18 * scale).ln() / ln_a / 2.0).floor() as i64 - 1;
    // Largest band: weight tail beyond u = a^{2k}/scale below 1e-18.
    let u_cut = (alpha * 1e-18).powf(-1.0 / alpha).min(1e300);
    let k_hi = ((u_cut * scale).ln() / ln_a / 2.0).ceil() as i64 + 1;
    let mut total = 0.0;
    for k in k_lo..=k_hi {
        // band in tau: (-a^{2k+1}, -a^{2k}]
        let b_lo = -a.powi(2 * k as i32 + 1);
        let b_hi = -a.powi(2 * k as i32);
        let t_lo = b_lo.max(lo);
        let t_hi = b_hi.min(top);
        if !(t_hi > t_lo) {
            continue;
        }
        let u1 = ((t - t_hi) / scale).max(0.0);
        let u2 = (t - t_lo) / scale;
        let m = band_mass(alpha, u1, u2);
        total += if k % 2 == 0 { m } else { -m };
    }
    total
}

/// `I_h = int_0^inf e^{-1/(4u)} u^{-a-1} g(h - u) du`; `I_0` is the constant `C1`.
pub fn shifted_band_integral(a: f64, alpha: f64, h: f64) -> f64 {
    band_sum_in(a, alpha, h, 1.0, f64::NEG_INFINITY, f64::INFINITY)
}

/// `int_1^a e^{-1/(4u)} u^{-a-1} du`.
pub fn central_band_integral(a: f64, alpha: f64) -> f64 {
    band_mass(alpha, 1.0, a)
}

/// Base `a`, constant `C1 = I_0` and admissibility radius `eta0` for the divergence example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseChoice {
    pub a: f64,
    pub c1: f64,
    pub eta0: f64,
}

const A_STEP: f64 = 0.25;
const H_POINTS: usize = 201;

/// `C1 = I_0` and `eta0` for a given base: `eta0` is the largest of
/// `0.99, 0.98, ..., 0.01` for which `I_h >= C1/2` at 201 equispaced `h` in
/// `[-eta0, eta0]`. Fails when `C1 <= 0` or no radius qualifies.
pub fn base_choice_for(a: f64, alpha: f64) -> Result<BaseChoice> {
    let c1 = shifted_band_integral(a, alpha, 0.0);
    if !(c1 > 0.0) {
        return Err(Error::SearchFailure(format!("base {a} gives C1 = {c1:.4e} <= 0")));
    }
    (1..=99)
        .rev()
        .map(|k| k as f64 / 100.0)
        .find(|&eta| {
            (0..H_POINTS).all(|i| {
                let h = -eta + 2.0 * eta * i as f64 / (H_POINTS - 1) as f64;
                shifted_band_integral(a, alpha, h) >= 0.5 * c1
            })
        })
        .map(|eta0| BaseChoice { a, c1, eta0 })
        .ok_or_else(|| Error::SearchFailure(format!("no admissibility radius for base {a}")))
}

/// Smallest `a` on the grid `lo, lo + 0.25, ...` up to `hi` with
/// `int_1^a w > int_0^{1/a} w + int_{a^2}^inf w` (so `I_0 > 0`), where
/// `w(u) = e^{-1/(4u)} u^{-a-1}`, and for which [`base_choice_for`] succeeds.
pub fn choose_base_a(alpha: f64, range: (f64, f64)) -> Result<BaseChoice> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (lo, hi) = range;
    if !(lo > 1.0 && hi <= 100.0 && lo <= hi) {
        return Err(Error::Domain(format!("search range must lie in (1, 100], got ({lo}, {hi})")));
    }
    let steps = ((hi - lo) / A_STEP + 1e-9).floor() as usize;
    for i in 0..=steps {
        let a = lo + A_STEP * i as f64;
        let central = central_band_integral(a, alpha);
        let tails = band_mass(alpha, 0.0, 1.0 / a) + band_mass(alpha, a * a, f64::INFINITY);
        if central <= tails {
            continue;
        }
        if let Ok(choice) = base_choice_for(a, alpha) {
            return Ok(choice);
        }
    }
    Err(Error::SearchFailure(format!("no base a in [{lo}, {hi}] satisfies the tail condition for alpha = {alpha}")))
}
