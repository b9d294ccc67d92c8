//! Scans for the two telescoping estimates used in the Cotlar argument.

use super::{fit_line, BoundReport, Sample};
use crate::error::{Error, Result};
use crate::sequences::{telescope_sum, LacunarySequence, MultiplierSequence};

const DECAY_SLOPE_SLACK: f64 = 0.1;

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (lo.ln(), hi.ln());
    (0..count).map(|i| (la + (lb - la) * i as f64 / (count - 1).max(1) as f64).exp()).collect()
}

/// Sampled sup of `|sum_{j=m}^{M} v_j (psi_{j+1}(s) - psi_j(s)) s^{-1-a}| a_m^2`
/// over `m in m_range`, `M = m+1 ..= m_top`, and `s_count` log-spaced
/// `s in [1e-3, 1e3]`.
pub fn lemma33_uniform_bound(
    a: &LacunarySequence,
    v: &MultiplierSequence,
    alpha: f64,
    m_range: (i64, i64),
    m_top: i64,
    s_count: usize,
) -> Result<BoundReport> {
    if m_range.0 > m_range.1 || m_top <= m_range.1 {
        return Err(Error::Domain(format!("bad ranges m in {m_range:?}, M up to {m_top}")));
    }
    let s_grid = log_grid(1e-3, 1e3, s_count);
    let mut rows = Vec::new();
    for m in m_range.0..=m_range.1 {
        let am2 = a.a(m) * a.a(m);
        for big in m + 1..=m_top {
            for &s in &s_grid {
                let val = telescope_sum(a, v, m, big, alpha, s)?.abs();
                rows.push(Sample { point: vec![m as f64, big as f64, s], value: val, ratio: val * am2, skipped: false });
            }
        }
    }
    Ok(BoundReport::from_samples("|sum_{j=m}^{M} ...| <= C / a_m^2", rows))
}

/// For `d = k - m = 0..=d_max`, `Q(d) = sup |sum_{j=-M}^{m-1} ...(s)| a_k^2` over
/// `m in m_range` and `s = a_k^2 10^u`, `u in [0, 4]` (the constant `c` is 1).
///
/// `max_ratio` is the sampled constant in `Q(d) <= C rho^{-2a(d+1)}`. The slope
/// of `ln Q(d)` against `d`, fitted on the upper half `d >= d_max/2` where the
/// exponential factors have settled, must not exceed `-2 a ln rho + 0.1`.
pub fn lemma33_decay(
    a: &LacunarySequence,
    v: &MultiplierSequence,
    alpha: f64,
    m_range: (i64, i64),
    big_m: i64,
    d_max: i64,
    s_count: usize,
) -> Result<BoundReport> {
    if m_range.0 > m_range.1 || d_max < 2 {
        return Err(Error::Domain(format!("bad ranges m in {m_range:?}, d up to {d_max}")));
    }
    let rho = a.rho();
    let mut rows = Vec::new();
    let mut q = vec![0.0f64; d_max as usize + 1];
    for m in m_range.0..=m_range.1 {
        if m - 1 < -big_m {
            return Err(Error::Domain(format!("empty sum for m = {m}, M = {big_m}")));
        }
        for d in 0..=d_max {
            let ak = a.a(m + d);
            for u in log_grid(1.0, 1e4, s_count) {
                let s = ak * ak * u;
                let val = telescope_sum(a, v, -big_m, m - 1, alpha, s)?.abs() * ak * ak;
                q[d as usize] = q[d as usize].max(val);
                let ratio = val * rho.powf(2.0 * alpha * (d + 1) as f64);
                rows.push(Sample { point: vec![m as f64, d as f64, s], value: val, ratio, skipped: false });
            }
        }
    }
    let mut report = BoundReport::from_samples("|sum_{j=-M}^{m-1} ...| <= C a_k^{-2} rho^{-2a(k-m+1)}", rows);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        q.iter().enumerate().skip((d_max as usize + 1) / 2).filter(|(_, v)| **v > 0.0).map(|(d, v)| (d as f64, v.ln())).unzip();
    match fit_line(&xs, &ys) {
        Ok(fit) => {
            if fit.slope > -2.0 * alpha * rho.ln() + DECAY_SLOPE_SLACK {
                report.fail = true;
            }
            report.slope_fit = Some(fit);
        }
        Err(e) => {
            report.fail = true;
            report.notes.push(format!("no slope fit: {e}"));
        }
    }
    Ok(report)
}
