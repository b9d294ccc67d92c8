//! Adaptive Gauss-Kronrod integration on finite and semi-infinite ranges,
//! generalized Gauss-Laguerre rules, and the two subordination evaluators.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::kernels::subordination_weight;
use crate::transforms::spec::check_alpha;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// Global adaptive bisection with a 21-point Gauss-Kronrod pair.
    Adaptive,
    /// Substitution to a Gamma-weighted integral on `(0, inf)` followed by
    /// generalized Gauss-Laguerre rules of doubling order.
    GaussLaguerre,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            kind: RuleKind::Adaptive,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_evals: 1_000_000,
        }
    }
}

impl QuadratureRule {
    pub fn new(kind: RuleKind, abs_tol: f64, rel_tol: f64, max_evals: usize) -> Result<Self> {
        let rule = Self { kind, abs_tol, rel_tol, max_evals };
        rule.validate()?;
        Ok(rule)
    }

    pub fn adaptive(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    pub fn gauss_laguerre(abs_tol: f64, rel_tol: f64) -> Self {
        Self { kind: RuleKind::GaussLaguerre, abs_tol, rel_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if self.max_evals < 100 {
            return Err(Error::Domain(format!("max_evals must be at least 100, got {}", self.max_evals)));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Scalar types the integrators accept: real and complex.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn parts(&self) -> (f64, f64);
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn parts(&self) -> (f64, f64) {
        (*self, 0.0)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn parts(&self) -> (f64, f64) {
        (self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub err_estimate: f64,
    pub evals: usize,
}

// Kronrod abscissae on [0, 1]; odd positions are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600768272455,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

fn check_finite<T: QuadValue>(v: T, x: f64) -> Result<T> {
    let (re, im) = v.parts();
    if re.is_finite() && im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("integrand is not finite at {x:e}")))
    }
}

/// One 21-point Kronrod panel: value and the QUADPACK error estimate.
fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Result<(T, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [T::zero(); 21];
    fv[10] = check_finite(f(c), c)?;
    for i in 0..10 {
        let dx = h * XGK[i];
        fv[i] = check_finite(f(c - dx), c - dx)?;
        fv[20 - i] = check_finite(f(c + dx), c + dx)?;
    }
    let mut resk = fv[10] * WGK[10];
    let mut resabs = fv[10].magnitude() * WGK[10];
    let mut resg = T::zero();
    for i in 0..10 {
        let pair = fv[i] + fv[20 - i];
        resk = resk + pair * WGK[i];
        resabs += (fv[i].magnitude() + fv[20 - i].magnitude()) * WGK[i];
        if i % 2 == 1 {
            resg = resg + pair * WG[i / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = (fv[10] - mean).magnitude() * WGK[10];
    for i in 0..10 {
        resasc += ((fv[i] - mean).magnitude() + (fv[20 - i] - mean).magnitude()) * WGK[i];
    }
    let habs = h.abs();
    resasc *= habs;
    resabs *= habs;
    let mut err = (resk - resg).magnitude() * habs;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok((resk * h, err))
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Global adaptive integration of `f` over `[a, b]`, starting from `panels`
/// equal pieces and always bisecting the panel with the largest error.
pub fn adaptive_gk<T, F>(f: F, a: f64, b: f64, panels: usize, rule: &QuadratureRule) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("finite limits required, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate { value: T::zero(), err_estimate: 0.0, evals: 0 });
    }
    let panels = panels.max(1);
    let mut heap = BinaryHeap::with_capacity(64);
    let mut frozen: Vec<Panel<T>> = Vec::new();
    let mut evals = 0usize;
    let width = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        let (value, err) = gk21(&f, lo, hi)?;
        evals += 21;
        heap.push(Panel { a: lo, b: hi, value, err });
    }
    let mut iter = 0usize;
    let (mut value, mut err) = totals(&heap, &frozen);
    loop {
        if iter % 128 == 0 {
            (value, err) = totals(&heap, &frozen);
        }
        iter += 1;
        if err <= rule.target(value.magnitude()) {
            (value, err) = totals(&heap, &frozen);
            if err <= rule.target(value.magnitude()) {
                return Ok(Estimate { value: sum_in_order(&heap, &frozen), err_estimate: err, evals });
            }
        }
        if evals >= rule.max_evals || heap.is_empty() {
            let (re, im) = value.parts();
            return Err(Error::NonConvergence { partial: re, partial_im: im, err_estimate: err, evals });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e3 * f64::EPSILON * mid.abs() {
            frozen.push(worst);
            continue;
        }
        let (v1, e1) = gk21(&f, worst.a, mid)?;
        let (v2, e2) = gk21(&f, mid, worst.b)?;
        evals += 42;
        value = value - worst.value + v1 + v2;
        err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
}

fn totals<T: QuadValue>(heap: &BinaryHeap<Panel<T>>, frozen: &[Panel<T>]) -> (T, f64) {
    let mut value = T::zero();
    let mut err = 0.0;
    for p in heap.iter().chain(frozen.iter()) {
        value = value + p.value;
        err += p.err;
    }
    (value, err)
}

/// Sums panel values left to right so the result does not depend on heap layout.
fn sum_in_order<T: QuadValue>(heap: &BinaryHeap<Panel<T>>, frozen: &[Panel<T>]) -> T {
    let mut all: Vec<(f64, T)> = heap.iter().chain(frozen.iter()).map(|p| (p.a, p.value)).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    all.into_iter().fold(T::zero(), |acc, (_, v)| acc + v)
}

/// `int_a^b f`. Gauss-Laguerre rules have no meaning on a finite range, so both
/// kinds use adaptive Gauss-Kronrod here.
pub fn integrate<T, F>(f: F, a: f64, b: f64, rule: &QuadratureRule) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    rule.validate()?;
    if a > b {
        let e = adaptive_gk(f, b, a, 4, rule)?;
        return Ok(Estimate { value: e.value * -1.0, ..e });
    }
    adaptive_gk(f, a, b, 4, rule)
}

/// `int_a^b f` for `0 < a < b` after `s = e^x`; suited to integrands whose
/// features are spread over several decades.
pub fn integrate_log_range<T, F>(f: F, a: f64, b: f64, rule: &QuadratureRule) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if !(a > 0.0 && b >= a) {
        return Err(Error::Domain(format!("log range needs 0 < a <= b, got [{a}, {b}]")));
    }
    let (la, lb) = (a.ln(), b.ln());
    let panels = ((lb - la) / 2.0).ceil().clamp(1.0, 64.0) as usize;
    adaptive_gk(
        |x| {
            let s = x.exp();
            f(s) * s
        },
        la,
        lb,
        panels,
        rule,
    )
}

/// `int_0^inf f(u) du`.
pub fn integrate_semi_infinite<T, F>(f: F, rule: &QuadratureRule) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_semi_infinite_scaled(f, 1.0, rule)
}

/// `int_0^inf f(u) du` where `scale` marks where the integrand's mass sits.
///
/// Adaptive: `u = scale e^x`, then `x = t / (1 - t^2)` on `(-1, 1)`.
/// Gauss-Laguerre: `u = scale v` and plain Laguerre nodes applied to `e^v f`.
pub fn integrate_semi_infinite_scaled<T, F>(f: F, scale: f64, rule: &QuadratureRule) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    rule.validate()?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("scale must be positive and finite, got {scale}")));
    }
    match rule.kind {
        RuleKind::Adaptive => adaptive_gk(
            |t: f64| {
                let d = 1.0 - t * t;
                let x = t / d;
                let u = scale * x.exp();
                if !(u > 1e-290 && u < 1e290) {
                    return T::zero();
                }
                let fu = f(u);
                if fu.magnitude() == 0.0 {
                    return T::zero();
                }
                fu * (u * (1.0 + t * t) / (d * d))
            },
            -1.0,
            1.0,
            16,
            rule,
        ),
        RuleKind::GaussLaguerre => laguerre_doubling(|v| f(scale * v) * (v.exp() * scale), 0.0, rule),
    }
}

/// `int_0^inf e^{-r} r^beta h(r) dr` for `beta > -1`.
pub fn integrate_gamma_weighted<T, F>(h: F, beta: f64, rule: &QuadratureRule) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    rule.validate()?;
    if !(beta > -1.0) {
        return Err(Error::Domain(format!("Gamma weight exponent must exceed -1, got {beta}")));
    }
    match rule.kind {
        RuleKind::Adaptive => integrate_semi_infinite_scaled(
            |r| {
                let w = (beta * r.ln() - r).exp();
                if w == 0.0 {
                    T::zero()
                } else {
                    h(r) * w
                }
            },
            1.0,
            rule,
        ),
        RuleKind::GaussLaguerre => laguerre_doubling(h, beta, rule),
    }
}

/// Nodes and weights of the `n`-point rule for `r^beta e^{-r}` on `(0, inf)`
/// (Golub-Welsch).
pub fn gauss_laguerre_nodes(n: usize, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jac[(k, k)] = 2.0 * k as f64 + beta + 1.0;
        if k + 1 < n {
            let off = ((k as f64 + 1.0) * (k as f64 + 1.0 + beta)).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mu0 = gamma(beta + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn laguerre_doubling<T, F>(h: F, beta: f64, rule: &QuadratureRule) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut prev: Option<T> = None;
    let mut evals = 0;
    let mut n = 8;
    let mut last_err = f64::INFINITY;
    let mut last = T::zero();
    while n <= 128 && evals + n <= rule.max_evals {
        let (x, w) = gauss_laguerre_nodes(n, beta);
        let mut sum = T::zero();
        for (xi, wi) in x.iter().zip(&w) {
            if *wi == 0.0 {
                continue;
            }
            sum = sum + check_finite(h(*xi), *xi)? * *wi;
        }
        evals += n;
        if let Some(p) = prev {
            last_err = (sum - p).magnitude();
            if last_err <= rule.target(sum.magnitude()) {
                return Ok(Estimate { value: sum, err_estimate: last_err, evals });
            }
        }
        prev = Some(sum);
        last = sum;
        n *= 2;
    }
    let (re, im) = last.parts();
    Err(Error::NonConvergence { partial: re, partial_im: im, err_estimate: last_err, evals })
}

fn check_scale(tau: f64, alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tau must be positive and finite, got {tau}")));
    }
    Ok(())
}

/// First form of the fractional Poisson formula:
/// `tau^{2a}/(4^a Gamma(a)) int_0^inf e^{-tau^2/(4s)} heat(s) s^{-1-a} ds`.
///
/// The adaptive rule integrates in `s` itself (log-mapped around `tau^2/4`);
/// the Gauss-Laguerre rule substitutes `r = tau^2/(4s)` first.
pub fn subordinate_heat<F>(heat: F, tau: f64, alpha: f64, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_scale(tau, alpha)?;
    match rule.kind {
        RuleKind::Adaptive => {
            let e = integrate_semi_infinite_scaled(
                |s| {
                    let w = subordination_weight(tau, alpha, s);
                    if w == 0.0 {
                        0.0
                    } else {
                        w * heat(s)
                    }
                },
                tau * tau / 4.0,
                rule,
            )?;
            Ok(e.value)
        }
        RuleKind::GaussLaguerre => subordinate_heat_rform(heat, tau, alpha, rule),
    }
}

/// Second form: `(1/Gamma(a)) int_0^inf e^{-r} heat(tau^2/(4r)) r^{a-1} dr`.
pub fn subordinate_heat_rform<F>(heat: F, tau: f64, alpha: f64, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_scale(tau, alpha)?;
    let q = tau * tau / 4.0;
    let e = integrate_gamma_weighted(|r| heat(q / r), alpha - 1.0, rule)?;
    Ok(e.value * (-ln_gamma(alpha)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

/// Both sides of
/// `int_0^inf e^{-z0 u - z0/u} u^{-a} du = z0^{1-a} int_0^inf e^{-r - z0^2/r} r^{a-2} dr`
/// by complex quadrature along the real axis, for `|arg z0| <= pi/4`.
pub fn contour_identity_check(z0: Complex64, alpha: f64, rule: &QuadratureRule) -> Result<ContourCheck> {
    check_alpha(alpha)?;
    if !(z0.re > 0.0) || z0.arg().abs() > std::f64::consts::FRAC_PI_4 + 1e-12 {
        return Err(Error::Domain(format!("z0 = {z0} lies outside the sector |arg z| <= pi/4")));
    }
    let lhs = integrate_semi_infinite_scaled(
        |u: f64| (-z0 * (u + 1.0 / u) - alpha * u.ln()).exp(),
        1.0,
        rule,
    )?
    .value;
    let z2 = z0 * z0;
    let inner = integrate_semi_infinite_scaled(
        |r: f64| (-z2 / r - r + (alpha - 2.0) * r.ln()).exp(),
        z0.norm(),
        rule,
    )?
    .value;
    let rhs = z0.powf(1.0 - alpha) * inner;
    Ok(ContourCheck { lhs, rhs, gap: (lhs - rhs).norm() })
}

/// Vector-valued form of [`adaptive_gk`]: `f(x, out)` fills all components and
/// every component shares one set of panels. The error of a panel is the largest
/// component error, and the target uses the largest component magnitude.
pub fn adaptive_gk_vec<F>(f: F, dim: usize, a: f64, b: f64, panels: usize, rule: &QuadratureRule) -> Result<(Vec<f64>, f64)>
where
    F: Fn(f64, &mut [f64]),
{
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::Domain(format!("finite ordered limits required, got [{a}, {b}]")));
    }
    if a == b || dim == 0 {
        return Ok((vec![0.0; dim], 0.0));
    }
    let mut scratch = vec![0.0; 21 * dim];
    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();
    let mut store: Vec<Vec<f64>> = Vec::new();
    let mut evals = 0usize;
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        let (v, e) = gk21_vec(&f, dim, lo, hi, &mut scratch)?;
        evals += 21;
        store.push(v);
        heap.push(Panel { a: lo, b: hi, value: store.len() - 1, err: e });
    }
    let mut total = vec![0.0; dim];
    loop {
        total.iter_mut().for_each(|t| *t = 0.0);
        let mut err = 0.0;
        for p in heap.iter().chain(frozen.iter()) {
            for (t, v) in total.iter_mut().zip(&store[p.value]) {
                *t += v;
            }
            err += p.err;
        }
        let mag = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if err <= rule.target(mag) {
            let mut order: Vec<(f64, usize)> = heap.iter().chain(frozen.iter()).map(|p| (p.a, p.value)).collect();
            order.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut out = vec![0.0; dim];
            for (_, id) in order {
                for (o, v) in out.iter_mut().zip(&store[id]) {
                    *o += v;
                }
            }
            return Ok((out, err));
        }
        if evals >= rule.max_evals || heap.is_empty() {
            return Err(Error::NonConvergence { partial: mag, partial_im: 0.0, err_estimate: err, evals });
        }
        // Split up to eight of the worst panels before re-summing.
        for _ in 0..8 {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e3 * f64::EPSILON * mid.abs() {
                frozen.push(worst);
                continue;
            }
            let (v1, e1) = gk21_vec(&f, dim, worst.a, mid, &mut scratch)?;
            let (v2, e2) = gk21_vec(&f, dim, mid, worst.b, &mut scratch)?;
            evals += 42;
            store[worst.value] = v1;
            store.push(v2);
            heap.push(Panel { a: worst.a, b: mid, value: worst.value, err: e1 });
            heap.push(Panel { a: mid, b: worst.b, value: store.len() - 1, err: e2 });
        }
    }
}

fn gk21_vec<F: Fn(f64, &mut [f64])>(f: &F, dim: usize, a: f64, b: f64, fv: &mut [f64]) -> Result<(Vec<f64>, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for i in 0..21 {
        let x = if i < 10 {
            c - h * XGK[i]
        } else if i == 10 {
            c
        } else {
            c + h * XGK[20 - i]
        };
        let row = &mut fv[i * dim..(i + 1) * dim];
        f(x, row);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("integrand is not finite at {x:e}")));
        }
    }
    let habs = h.abs();
    let mut out = vec![0.0; dim];
    let mut worst = 0.0f64;
    for d in 0..dim {
        let at = |i: usize| fv[i * dim + d];
        let mut resk = at(10) * WGK[10];
        let mut resabs = at(10).abs() * WGK[10];
        let mut resg = 0.0;
        for i in 0..10 {
            let pair = at(i) + at(20 - i);
            resk += pair * WGK[i];
            resabs += (at(i).abs() + at(20 - i).abs()) * WGK[i];
            if i % 2 == 1 {
                resg += pair * WG[i / 2];
            }
        }
        let mean = resk * 0.5;
        let mut resasc = (at(10) - mean).abs() * WGK[10];
        for i in 0..10 {
            resasc += ((at(i) - mean).abs() + (at(20 - i) - mean).abs()) * WGK[i];
        }
        resasc *= habs;
        resabs *= habs;
        let mut err = (resk - resg).abs() * habs;
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        worst = worst.max(err);
        out[d] = resk * h;
    }
    Ok((out, worst))
}
