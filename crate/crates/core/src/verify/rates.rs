//! Decay of the tail terms in the pointwise convergence argument, measured by
//! direct quadrature of the kernel against a smooth bump.

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;

use super::{fit_line, BoundReport, Sample};
use crate::error::{Error, Result};
use crate::kernels::{diff_time_weight, gauss_weierstrass};
use crate::quadrature::{integrate, integrate_log_range, integrate_semi_infinite_scaled, QuadratureRule};
use crate::sequences::{make_lacunary, MultiplierSequence, SequenceKind};
use crate::transforms::TransformSpec;

const RATE_TOL: f64 = 0.15;

/// `phi(y, t) = amplitude exp(1 - 1/(1 - r^2))`, `r^2 = (y^2 + t^2)/R^2`, on `R^1 x R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestBump {
    pub radius: f64,
    pub amplitude: f64,
}

impl TestBump {
    pub fn eval(&self, y: f64, t: f64) -> f64 {
        let r2 = (y * y + t * t) / (self.radius * self.radius);
        if r2 >= 1.0 || self.amplitude == 0.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }
}

/// `a_j = base^j`, `v_j = (-1)^j` (or 1), in one space dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTemplate {
    pub alpha: f64,
    pub base: f64,
    pub alternating: bool,
}

impl RateTemplate {
    fn spec(&self, n1: i64, n2: i64, big_m: i64) -> Result<TransformSpec> {
        let a = make_lacunary(SequenceKind::Geometric(self.base), self.base, -big_m, big_m + 1)?;
        let alt = self.alternating;
        let v = MultiplierSequence::from_fn(-big_m, big_m, |j| if alt && j % 2 != 0 { -1.0 } else { 1.0 })?;
        TransformSpec::new(self.alpha, n1, n2, a, v)
    }

    /// Exponents the proof gives for the A, B1 and B2 terms (`n = 1`); B1 uses
    /// `eps = alpha/2` when `alpha <= 1/2`.
    pub fn claimed_exponents(&self) -> [f64; 3] {
        let a = self.alpha;
        let b1 = if a <= 0.5 { 2.0 * a - a / 2.0 } else { 2.0 * a - 1.0 };
        [-3.0, b1, 2.0 * a]
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub a_term: BoundReport,
    pub b1_term: BoundReport,
    pub b2_term: BoundReport,
}

impl ConvergenceReport {
    pub fn all_within_tolerance(&self) -> bool {
        !self.a_term.fail && !self.b1_term.fail && !self.b2_term.fail
    }
}

fn rule() -> QuadratureRule {
    QuadratureRule { max_evals: 20_000_000, ..QuadratureRule::adaptive(1e-300, 1e-9) }
}

/// Time samples `t = kappa a_L^2` for the A-term sup.
fn kappas() -> Vec<f64> {
    (0..16).map(|i| 10f64.powf(-2.0 + 3.0 * i as f64 / 15.0)).collect()
}

/// `(T_{(L,M)} phi)(0, t) = int int K(-y, t - s) phi(y, s) dy ds` over the bump's support.
fn a_term_at(spec: &TransformSpec, phi: &TestBump, t: f64) -> Result<f64> {
    let r = phi.radius;
    let rl = rule();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let outer = integrate(
        |s: f64| {
            let lag = t - s;
            let tw = diff_time_weight(spec, lag);
            if tw == 0.0 {
                return 0.0;
            }
            let half = (r * r - s * s).max(0.0).sqrt();
            match integrate(|y: f64| gauss_weierstrass(&[y], lag).unwrap_or(0.0) * phi.eval(y, s), -half, half, &rl) {
                Ok(e) => tw * e.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        -r,
        r,
        &rl,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(outer?.value)
}

/// `E_y[phi(-y, -s)] - phi(0, 0)` for `y` distributed as `W(., s)`.
fn centered_heat(phi: &TestBump, s: f64) -> Result<f64> {
    let phi0 = phi.eval(0.0, 0.0);
    if s >= phi.radius {
        return Ok(-phi0);
    }
    let u_max = (phi.radius / (2.0 * s.sqrt())).min(8.0);
    let e = integrate(|u: f64| (-u * u).exp() * phi.eval(-2.0 * s.sqrt() * u, -s), -u_max, u_max, &rule())?;
    Ok(e.value / PI.sqrt() - phi0)
}

/// `int_{s in range} int K(y, s) (phi(-y, -s) - phi(0, 0)) dy ds`.
fn b_term(spec: &TransformSpec, phi: &TestBump, lower: bool) -> Result<f64> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |s: f64| {
        let tw = diff_time_weight(spec, s);
        if tw == 0.0 {
            return 0.0;
        }
        match centered_heat(phi, s) {
            Ok(v) => tw * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let value = if lower {
        let a = spec.a().a(spec.n1());
        integrate_log_range(integrand, a * a / 200.0, 1.0, &rule())?.value
    } else {
        integrate_semi_infinite_scaled(|u: f64| integrand(1.0 + u), 1.0, &rule())?.value
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(value)
}

fn finish(claimed: &str, expected: f64, rows: Vec<Sample>, per_l: &[(f64, f64)]) -> BoundReport {
    let mut report = BoundReport::from_samples(claimed, rows);
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        per_l.iter().filter(|(_, v)| *v > 0.0).map(|(a, v)| (a.ln(), v.ln())).unzip();
    match fit_line(&xs, &ys) {
        Ok(fit) => {
            if (fit.slope - expected).abs() > RATE_TOL * expected.abs() {
                report.fail = true;
                report.notes.push(format!("slope {:.4} outside {expected:.4} +/- 15%", fit.slope));
            }
            report.fitted_constant = fit.intercept.exp();
            report.slope_fit = Some(fit);
        }
        Err(e) => report.notes.push(format!("no slope fit: {e}")),
    }
    report
}

/// Fits `ln|A|` against `ln a_L` and `ln|B1|`, `ln|B2|` against `ln a_{-L}` for
/// each `L` in `l_list`, where
/// `A = T_{(L,M)} phi` (sup over `x = 0`, `t = kappa a_L^2`) and
/// `B = T_{(-M,-L)} phi(0, 0)` split at `s = 1`.
///
/// Sample ratios are `|term| / a^{expected}`. The bump radius must be below 1.
pub fn convergence_rates(phi: &TestBump, template: &RateTemplate, l_list: &[i64], big_m: i64) -> Result<ConvergenceReport> {
    if !(phi.radius > 0.0 && phi.radius < 1.0) {
        return Err(Error::Domain(format!("bump radius must lie in (0, 1), got {}", phi.radius)));
    }
    if l_list.iter().any(|&l| l < 1 || l >= big_m) {
        return Err(Error::Domain(format!("every L must satisfy 1 <= L < M = {big_m}")));
    }
    let [ea, eb1, eb2] = template.claimed_exponents();

    let ks = kappas();
    let jobs: Vec<(i64, f64)> = l_list.iter().flat_map(|&l| ks.iter().map(move |&k| (l, k))).collect();
    let a_vals: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(l, k)| {
            let spec = template.spec(l, big_m, big_m)?;
            let al = spec.a().a(l);
            a_term_at(&spec, phi, k * al * al)
        })
        .collect();
    let mut a_rows = Vec::new();
    let mut a_sup = Vec::new();
    for (&(l, k), v) in jobs.iter().zip(a_vals) {
        let v = v?.abs();
        let al = template.base.powi(l as i32);
        a_rows.push(Sample { point: vec![l as f64, k], value: v, ratio: v / al.powf(ea), skipped: false });
        match a_sup.last_mut() {
            Some((a, best)) if *a == al => *best = f64::max(*best, v),
            _ => a_sup.push((al, v)),
        }
    }

    let b_vals: Vec<Result<(f64, f64)>> = l_list
        .par_iter()
        .map(|&l| {
            let spec = template.spec(-big_m, -l, big_m)?;
            Ok((b_term(&spec, phi, true)?, b_term(&spec, phi, false)?))
        })
        .collect();
    let (mut b1_rows, mut b2_rows, mut b1_pts, mut b2_pts) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (&l, v) in l_list.iter().zip(b_vals) {
        let (b1, b2) = v?;
        let a = template.base.powi(-l as i32);
        b1_rows.push(Sample { point: vec![l as f64], value: b1.abs(), ratio: b1.abs() / a.powf(eb1), skipped: false });
        b2_rows.push(Sample { point: vec![l as f64], value: b2.abs(), ratio: b2.abs() / a.powf(eb2), skipped: false });
        b1_pts.push((a, b1.abs()));
        b2_pts.push((a, b2.abs()));
    }

    Ok(ConvergenceReport {
        a_term: finish("|A| <= C a_L^{-(2+n)}", ea, a_rows, &a_sup),
        b1_term: finish("|B1| <= C a_{-L}^{2a-eps} (2a-1 if a > 1/2)", eb1, b1_rows, &b1_pts),
        b2_term: finish("|B2| <= C a_{-L}^{2a}", eb2, b2_rows, &b2_pts),
    })
}
