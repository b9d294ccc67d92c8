use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::{BoundReport, Sample};
use crate::error::{Error, Result};
use crate::kernels::diff_time_weight;
use crate::quadrature::{integrate_semi_infinite_scaled, QuadratureRule};
use crate::transforms::TransformSpec;

const MIN_MULTIPLIER_SAMPLES: usize = 1000;
const BLOCK: usize = 50;
const BLOWUP_FACTOR: f64 = 10.0;

fn default_rule() -> QuadratureRule {
    QuadratureRule::adaptive(1e-14, 1e-11)
}

/// `m(tau)(xi, rho) = (1/Gamma(a)) int_0^inf e^{-r} e^{-(tau^2/4r)(i rho + |xi|^2)} r^{a-1} dr`.
///
/// Evaluated after `r = sqrt(w) u` with `w = tau^2 (i rho + |xi|^2) / 4`, which
/// turns the integrand into `e^{-sqrt(w)(u + 1/u)} u^{a-1}`; the factor
/// `e^{-2 sqrt(w)}` is pulled out so large frequencies do not underflow early.
pub fn single_scale_multiplier(tau: f64, xi: &[f64], rho: f64, alpha: f64, rule: &QuadratureRule) -> Result<Complex64> {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    if !(xi2.is_finite() && rho.is_finite()) {
        return Err(Error::Domain("frequency must be finite".into()));
    }
    let w = Complex64::new(xi2, rho) * (tau * tau / 4.0);
    if w.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let sw = w.sqrt();
    let pre = (w.ln() * (alpha / 2.0) - sw * 2.0 - ln_gamma(alpha)).exp();
    if pre.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Mass sits near u = 1 when |w| is large and spreads over [|sw|, 1/|sw|] otherwise.
    let est = integrate_semi_infinite_scaled(
        |u: f64| {
            let e = -sw * (u + 1.0 / u - 2.0) + (alpha - 1.0) * u.ln();
            if e.re < -745.0 {
                Complex64::new(0.0, 0.0)
            } else {
                e.exp()
            }
        },
        1.0,
        rule,
    )?;
    Ok(pre * est.value)
}

/// `K_N^alpha` in frequency space, `sum_j v_j (m(a_{j+1}) - m(a_j))`, with the
/// convention `K^(xi, rho) = int int K(y, s) e^{-i(y.xi + s rho)} dy ds`.
pub fn multiplier_value(xi: &[f64], rho: f64, spec: &TransformSpec) -> Result<Complex64> {
    multiplier_value_with(xi, rho, spec, &default_rule())
}

pub fn multiplier_value_with(xi: &[f64], rho: f64, spec: &TransformSpec, rule: &QuadratureRule) -> Result<Complex64> {
    let alpha = spec.alpha();
    let mut prev = single_scale_multiplier(spec.a().a(spec.n1()), xi, rho, alpha, rule)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in spec.n1()..=spec.n2() {
        let next = single_scale_multiplier(spec.a().a(j + 1), xi, rho, alpha, rule)?;
        sum += (next - prev) * spec.v().v(j);
        prev = next;
    }
    Ok(sum)
}

/// The same transform computed from samples of `K_N^alpha` in physical space:
/// a trapezoid sum uniform in each `y_i` and uniform in `ln s`.
///
/// The `s` range is `[a_min^2/400, 40/|xi|^2]`; beyond it the spatial factor
/// has already decayed below double precision, so `xi = 0` is rejected.
pub fn multiplier_value_physical(xi: &[f64], rho: f64, spec: &TransformSpec) -> Result<Complex64> {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    if !(xi2 > 0.0) {
        return Err(Error::Domain("physical-space transform needs xi != 0".into()));
    }
    let a_min = spec.a().a(spec.n1());
    let s_lo = a_min * a_min / 400.0;
    let s_hi = 40.0 / xi2;
    if !(s_hi > s_lo) {
        return Err(Error::Domain(format!("empty s range [{s_lo}, {s_hi}]")));
    }
    let y_max = (4.0 * s_hi * 37.0).sqrt();
    let dy = (4.0 * s_lo).sqrt() / 3.0;
    let ny = (y_max / dy).ceil() as usize;
    let ns = 3000usize;
    let (la, lb) = (s_lo.ln(), s_hi.ln());
    let h = (lb - la) / (ns - 1) as f64;
    let terms: Vec<Complex64> = (0..ns)
        .into_par_iter()
        .map(|i| {
            let s = (la + h * i as f64).exp();
            let tw = diff_time_weight(spec, s);
            if tw == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut spatial = Complex64::new(1.0, 0.0);
            for &x in xi {
                let mut acc = Complex64::new((4.0 * PI * s).sqrt().recip(), 0.0);
                for k in 1..=ny {
                    let y = dy * k as f64;
                    let g = (-y * y / (4.0 * s)).exp() / (4.0 * PI * s).sqrt();
                    if g == 0.0 {
                        break;
                    }
                    acc += 2.0 * g * (y * x).cos();
                }
                spatial *= acc * dy;
            }
            let wgt = if i == 0 || i + 1 == ns { 0.5 } else { 1.0 };
            spatial * Complex64::new(0.0, -s * rho).exp() * (tw * s * wgt)
        })
        .collect();
    Ok(terms.into_iter().sum::<Complex64>() * h)
}

/// Seeded frequency samples: `|xi|` log-uniform in `[1e-2, 1e2]` with a random
/// direction, `rho` with random sign and `|rho|` log-uniform in `[1e-3, 1e3]`.
pub fn multiplier_samples(n: usize, count: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = 10f64.powf(rng.gen_range(-2.0..=2.0));
            let xi = if n == 1 {
                vec![if rng.gen_bool(0.5) { r } else { -r }]
            } else {
                let th: f64 = rng.gen_range(0.0..2.0 * PI);
                vec![r * th.cos(), r * th.sin()]
            };
            let mag = 10f64.powf(rng.gen_range(-3.0..=3.0));
            let rho = if rng.gen_bool(0.5) { mag } else { -mag };
            (xi, rho)
        })
        .collect()
}

/// Sampled sup of `|K^_N^alpha|`. Fails when a sample exceeds ten times the
/// median of the block maxima (blocks of 50 samples in input order).
pub fn scan_multiplier_bound(spec: &TransformSpec, samples: &[(Vec<f64>, f64)]) -> Result<BoundReport> {
    if samples.len() < MIN_MULTIPLIER_SAMPLES {
        return Err(Error::Domain(format!(
            "multiplier scan needs at least {MIN_MULTIPLIER_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let rule = default_rule();
    let values: Vec<Result<f64>> = samples
        .par_iter()
        .map(|(xi, rho)| multiplier_value_with(xi, *rho, spec, &rule).map(|z| z.norm()))
        .collect();
    let mut rows = Vec::with_capacity(samples.len());
    for ((xi, rho), v) in samples.iter().zip(values) {
        let v = v?;
        let mut point = xi.clone();
        point.push(*rho);
        rows.push(Sample { point, value: v, ratio: v, skipped: false });
    }
    let mut block_max: Vec<f64> =
        rows.chunks(BLOCK).map(|c| c.iter().fold(0.0f64, |m, s| m.max(s.ratio))).collect();
    block_max.sort_by(f64::total_cmp);
    let median = block_max[block_max.len() / 2];
    let mut report = BoundReport::from_samples("sup |K^_N(xi, rho)| <= C", rows);
    if report.max_ratio > BLOWUP_FACTOR * median {
        report.fail = true;
        report.notes.push(format!("sample {:.3e} exceeds 10x block-max median {median:.3e}", report.max_ratio));
    }
    Ok(report)
}
