use std::f64::consts::PI;

use rayon::prelude::*;

use super::{fit_line, BoundReport, Sample};
use crate::error::{Error, Result};
use crate::kernels::{diff_transform_kernel, KernelPoint};
use crate::sequences::LacunarySequence;
use crate::transforms::TransformSpec;

const FD_REL: f64 = 1e-4;
/// Telescoping slopes are fitted on this decade range of `s`.
const MASS_FIT_RANGE: (f64, f64) = (1e-2, 1e2);
const MASS_SLOPE_TOL: f64 = 0.05;

/// Tensor grid of kernel samples for a spec whose scales span `[a_min, a_max]`.
///
/// `s` is log-spaced over `[min(1e-4, a_min^2/100), max(1e4, 100 a_max^2)]`.
/// For each `s`, `|y|` takes `nu` values `u sqrt(s)` with `u` in `[0, 8]` plus
/// `nu` log-spaced values in `[1e-2, 1e2]`. In two dimensions the direction of
/// `y` rotates with the sample index.
pub fn kernel_sample_grid(n: usize, a_min: f64, a_max: f64, ns: usize, nu: usize) -> Vec<KernelPoint> {
    let s_lo = (1e-4f64).min(a_min * a_min / 100.0);
    let s_hi = (1e4f64).max(a_max * a_max * 100.0);
    let (la, lb) = (s_lo.ln(), s_hi.ln());
    let mut out = Vec::with_capacity(ns * 2 * nu);
    for i in 0..ns {
        let s = (la + (lb - la) * i as f64 / (ns - 1).max(1) as f64).exp();
        let radii = (0..nu)
            .map(|k| 8.0 * k as f64 / (nu - 1).max(1) as f64 * s.sqrt())
            .chain((0..nu).map(|k| 10f64.powf(-2.0 + 4.0 * k as f64 / (nu - 1).max(1) as f64)));
        for (k, r) in radii.enumerate() {
            let y = if n == 1 {
                vec![r]
            } else {
                let th = 0.5 * PI * ((i * 7 + k * 3) % 16) as f64 / 16.0;
                vec![r * th.cos(), r * th.sin()]
            };
            out.push(KernelPoint::new(y, s, 0.0));
        }
    }
    out
}

fn parabolic_size(p: &KernelPoint) -> f64 {
    p.s.max(0.0).sqrt() + p.y_norm2().sqrt()
}

fn check_origin(samples: &[KernelPoint]) -> Result<()> {
    match samples.iter().position(|p| p.s == 0.0 && p.y_norm2() == 0.0) {
        Some(i) => Err(Error::Domain(format!("sample {i} is the origin"))),
        None => Ok(()),
    }
}

fn point_of(p: &KernelPoint) -> Vec<f64> {
    let mut v = p.y.clone();
    v.push(p.s);
    v
}

/// `sup |K_N(y, s)| (s^{1/2} + |y|)^{n+2}` over the samples.
pub fn check_kernel_size(spec: &TransformSpec, samples: &[KernelPoint]) -> Result<BoundReport> {
    check_origin(samples)?;
    let rows: Vec<Sample> = samples
        .par_iter()
        .map(|p| {
            let k = diff_transform_kernel(p, spec).abs();
            let ratio = if p.s <= 0.0 { 0.0 } else { k * parabolic_size(p).powi(p.n() as i32 + 2) };
            Sample { point: point_of(p), value: k, ratio, skipped: false }
        })
        .collect();
    Ok(BoundReport::from_samples("|K_N(y,s)| <= C (s^{1/2}+|y|)^{-(n+2)}", rows))
}

/// Central differences `(grad_y K, d_s K)` with steps `h_y = 1e-4 (s^{1/2} + |y|)`
/// and `h_s = 1e-4 s`. `None` when a step underflows or leaves `s > 0`.
pub fn kernel_derivatives(spec: &TransformSpec, p: &KernelPoint) -> Option<(Vec<f64>, f64)> {
    if p.s <= 0.0 {
        return Some((vec![0.0; p.n()], 0.0));
    }
    let hy = FD_REL * parabolic_size(p);
    let hs = FD_REL * p.s;
    if !(hy > 0.0 && hs > 0.0 && p.s - hs > 0.0 && p.s + hs > p.s) {
        return None;
    }
    let mut grad = vec![0.0; p.n()];
    let mut q = p.clone();
    for d in 0..p.n() {
        q.y[d] = p.y[d] + hy;
        let up = diff_transform_kernel(&q, spec);
        q.y[d] = p.y[d] - hy;
        let down = diff_transform_kernel(&q, spec);
        q.y[d] = p.y[d];
        grad[d] = (up - down) / (2.0 * hy);
    }
    q.s = p.s + hs;
    let up = diff_transform_kernel(&q, spec);
    q.s = p.s - hs;
    let down = diff_transform_kernel(&q, spec);
    let ds = (up - down) / (2.0 * hs);
    if grad.iter().all(|g| g.is_finite()) && ds.is_finite() {
        Some((grad, ds))
    } else {
        None
    }
}

/// Reports for `|grad_y K| (s^{1/2}+|y|)^{n+3}` and `|d_s K| (s^{1/2}+|y|)^{n+4}`.
pub fn check_kernel_gradients(spec: &TransformSpec, samples: &[KernelPoint]) -> Result<(BoundReport, BoundReport)> {
    check_origin(samples)?;
    let rows: Vec<(Sample, Sample)> = samples
        .par_iter()
        .map(|p| {
            let point = point_of(p);
            match kernel_derivatives(spec, p) {
                Some((grad, ds)) => {
                    let g = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let size = parabolic_size(p);
                    let n = p.n() as i32;
                    let (rg, rs) = if p.s <= 0.0 { (0.0, 0.0) } else { (g * size.powi(n + 3), ds.abs() * size.powi(n + 4)) };
                    (
                        Sample { point: point.clone(), value: g, ratio: rg, skipped: false },
                        Sample { point, value: ds.abs(), ratio: rs, skipped: false },
                    )
                }
                None => {
                    let s = Sample { point, value: 0.0, ratio: 0.0, skipped: true };
                    (s.clone(), s)
                }
            }
        })
        .collect();
    let (gy, gs): (Vec<Sample>, Vec<Sample>) = rows.into_iter().unzip();
    Ok((
        BoundReport::from_samples("|grad_y K_N(y,s)| <= C (s^{1/2}+|y|)^{-(n+3)}", gy),
        BoundReport::from_samples("|d_s K_N(y,s)| <= C (s^{1/2}+|y|)^{-(n+4)}", gs),
    ))
}

/// `sum_j |a_{j+1}^{2a} e^{-a_{j+1}^2/4s} - a_j^{2a} e^{-a_j^2/4s}|` over every
/// consecutive pair of `a`.
pub fn telescoping_sum_abs(a: &LacunarySequence, alpha: f64, s: f64) -> f64 {
    let psi = |x: f64| (2.0 * alpha * x.ln() - x * x / (4.0 * s)).exp();
    a.values().windows(2).map(|w| (psi(w[1]) - psi(w[0])).abs()).sum()
}

/// Sampled sup of `telescoping_sum_abs / s^alpha`, with a log-log slope fitted on
/// the samples inside `[1e-2, 1e2]`. Fails when the slope misses `alpha` by more
/// than 0.05.
pub fn check_telescoping_mass(a: &LacunarySequence, alpha: f64, s_samples: &[f64]) -> Result<BoundReport> {
    if let Some(s) = s_samples.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::Domain(format!("s samples must be positive, got {s}")));
    }
    let rows: Vec<Sample> = s_samples
        .iter()
        .map(|&s| {
            let v = telescoping_sum_abs(a, alpha, s);
            Sample { point: vec![s], value: v, ratio: v / s.powf(alpha), skipped: false }
        })
        .collect();
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for r in &rows {
        let s = r.point[0];
        if s >= MASS_FIT_RANGE.0 && s <= MASS_FIT_RANGE.1 && r.value > 0.0 {
            lx.push(s.ln());
            ly.push(r.value.ln());
        }
    }
    let mut report = BoundReport::from_samples("sum_j |psi_{j+1}(s) - psi_j(s)| <= C s^alpha", rows);
    match fit_line(&lx, &ly) {
        Ok(fit) => {
            if (fit.slope - alpha).abs() > MASS_SLOPE_TOL {
                report.fail = true;
            }
            report.slope_fit = Some(fit);
        }
        Err(e) => report.notes.push(format!("no slope fit: {e}")),
    }
    Ok(report)
}
