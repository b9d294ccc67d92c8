//! The two-dimensional growth examples: `f` is a signed staircase of
//! rectangles shrinking parabolically towards the origin, and `T_M^* f` is
//! evaluated pointwise band by band (an erf factor in space, quadrature in time).

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use statrs::function::erf::erf;

use super::bands::band_mass;
use super::config::{inverse_conjugate, GridParams};
use crate::error::{Error, Result};
use crate::kernels::poisson_constant;
use crate::quadrature::{integrate_log_range, QuadratureRule};
use crate::sequences::{make_lacunary, LacunarySequence, MultiplierSequence, SequenceKind};
use crate::transforms::SpaceTimeGrid;
use crate::verify::{fit_line, SlopeFit};

/// Weight mass below which a band is skipped.
const BAND_SKIP: f64 = 1e-15;
/// Below `u = 1/800` the factor `e^{-1/(4u)}` is under `e^{-200}`.
const U_FLOOR: f64 = 1.0 / 800.0;

fn rule() -> QuadratureRule {
    QuadratureRule::adaptive(1e-15, 1e-9)
}

/// Index `k <= 0` of the rectangle `(-a^k, -a^{k-1}] x (-a^{2k}, -a^{2k-1}]` holding `(x, t)`.
fn staircase_band(a: f64, x: f64, t: f64) -> Option<i64> {
    if !(x < 0.0 && t < 0.0 && x >= -1.0 && t >= -1.0) {
        return None;
    }
    let guess = ((-x).ln() / a.ln()).ceil() as i64;
    let k = (guess - 1..=guess + 1).find(|&k| {
        k <= 0 && a.powi(k as i32 - 1) < -x && -x <= a.powi(k as i32)
    })?;
    let (lo, hi) = (a.powi(2 * k as i32 - 1), a.powi(2 * k as i32));
    (lo < -t && -t <= hi).then_some(k)
}

/// `f(x, t) = sum_{k <= 0} (-1)^k chi_{(-a^k, -a^{k-1}] x (-a^{2k}, -a^{2k-1}]}(x, t)`.
pub fn staircase_profile(a: f64, x: f64, t: f64) -> f64 {
    match staircase_band(a, x, t) {
        Some(k) if k % 2 == 0 => 1.0,
        Some(_) => -1.0,
        None => 0.0,
    }
}

/// `int_{(-a^k, -a^{k-1}]} W(x - y, s) dy` in one space dimension.
fn spatial_factor(a: f64, k: i64, x: f64, s: f64) -> f64 {
    let d = 2.0 * s.sqrt();
    0.5 * (erf((x + a.powi(k as i32)) / d) - erf((x + a.powi(k as i32 - 1)) / d))
}

/// `P_tau f(x, t)` for the staircase, up to the constant `1/(4^a Gamma(a))`:
/// `sum_k (-1)^k int e^{-1/(4u)} u^{-a-1} E_k(x, tau^2 u) du` over
/// `t - tau^2 u in (-a^{2k}, -a^{2k-1}]`.
fn scale_value_unnormalized(a: f64, alpha: f64, tau: f64, x: f64, t: f64) -> Result<f64> {
    let t2 = tau * tau;
    let mut total = 0.0;
    let mut k = 0i64;
    loop {
        let lo = a.powi(2 * k as i32 - 1);
        let hi = a.powi(2 * k as i32);
        // s = t - tau' ranges over [t + a^{2k-1}, t + a^{2k})
        let u1 = ((t + lo) / t2).max(0.0);
        let u2 = (t + hi) / t2;
        if u2 > u1 && u2 > U_FLOOR && band_mass(alpha, u1, u2) > BAND_SKIP {
            let v = integrate_log_range(
                |u: f64| (-0.25 / u).exp() * u.powf(-alpha - 1.0) * spatial_factor(a, k, x, t2 * u),
                u1.max(U_FLOOR),
                u2,
                &rule(),
            )?
            .value;
            total += if k % 2 == 0 { v } else { -v };
        }
        // every smaller band lies in s in (max(t, 0), t + a^{2k-1})
        let rest_hi = (t + lo) / t2;
        let rest_lo = t.max(0.0) / t2;
        if rest_hi <= rest_lo || band_mass(alpha, rest_lo, rest_hi) <= BAND_SKIP {
            break;
        }
        k -= 1;
    }
    Ok(total)
}

/// `P_tau f(x, t)` for the staircase with base `a`.
pub fn staircase_scale_value(a: f64, alpha: f64, tau: f64, x: f64, t: f64) -> Result<f64> {
    Ok(poisson_constant(alpha) * scale_value_unnormalized(a, alpha, tau, x, t)?)
}

/// `int int e^{-1/(4u)} u^{-a-1} e^{-z^2/(4u)} u^{-1/2} f(h - z, h - u) dz du`,
/// i.e. `sqrt(4 pi) P_1 f(h, h)` without the Poisson constant.
pub fn staircase_band_integral(a: f64, alpha: f64, h: f64) -> Result<f64> {
    Ok((4.0 * PI).sqrt() * scale_value_unnormalized(a, alpha, 1.0, h, h)?)
}

/// Smallest `a` on the grid `lo, lo + 0.25, ...` up to `hi` whose central integral
/// `C1 = staircase_band_integral(a, alpha, 0)` is positive and dominates the tails:
/// `sqrt(pi) (int_0^{1/a^2} w + int_{a-1}^inf w) <= C1/4` with `w(u) = e^{-1/(4u)} u^{-a-1}`.
/// Returns `(a, C1)`.
pub fn choose_growth_base(alpha: f64, range: (f64, f64)) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let (lo, hi) = range;
    if !(lo > 1.0 && hi <= 100.0 && lo <= hi) {
        return Err(Error::Domain(format!("search range must lie in (1, 100], got ({lo}, {hi})")));
    }
    let steps = ((hi - lo) / 0.25 + 1e-9).floor() as usize;
    for i in 0..=steps {
        let a = lo + 0.25 * i as f64;
        let tails = PI.sqrt() * (band_mass(alpha, 0.0, 1.0 / (a * a)) + band_mass(alpha, a - 1.0, f64::INFINITY));
        let c1 = staircase_band_integral(a, alpha, 0.0)?;
        if c1 > 0.0 && tails <= 0.25 * c1 {
            return Ok((a, c1));
        }
    }
    Err(Error::SearchFailure(format!("no base a in [{lo}, {hi}] satisfies the tail condition for alpha = {alpha}")))
}

/// `sup_{-M <= N1 < N2 <= M} |sum_{j=N1}^{N2} v_j d_j|`, `d` indexed from `-M`.
pub fn window_sup(v: &[f64], d: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..d.len() {
        let mut run = 0.0;
        for j in i..d.len() {
            run += v[j] * d[j];
            if j > i {
                best = best.max(run.abs());
            }
        }
    }
    best
}

/// `d_j = P_{a^{j+1}} f - P_{a^j} f` at `(x, t)` for `j = -M..=M`.
pub fn staircase_differences(a: f64, alpha: f64, big_m: i64, x: f64, t: f64) -> Result<Vec<f64>> {
    let p = (-big_m..=big_m + 1)
        .map(|j| staircase_scale_value(a, alpha, a.powi(j as i32), x, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(p.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Multiplier choices for the three parts of the growth theorem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthPreset {
    /// `v_j = (-1)^{j+1} (1 + |j|)^{-2/p}`, an `l^p` sequence; averages obey the upper law.
    Upper { p: f64 },
    /// `v_j = (-1)^{j+1} (-j)^{-1/(p - eps)}` for `j <= -1`, `v_j = 0` for `j >= 0`.
    LowerLp { p: f64, epsilon: f64 },
    /// `v_j = (-1)^{j+1}`.
    LowerLinf,
}

impl GrowthPreset {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Upper { p } if !(p >= 1.0) => Err(Error::Domain(format!("p must be at least 1, got {p}"))),
            Self::LowerLp { p, epsilon } if !(p > 1.0 && p.is_finite() && epsilon > 0.0 && epsilon < p - 1.0) => {
                Err(Error::Domain(format!("need 1 < p < inf and 0 < eps < p - 1, got p = {p}, eps = {epsilon}")))
            }
            _ => Ok(()),
        }
    }

    pub fn weight(&self, j: i64) -> f64 {
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        match *self {
            Self::Upper { p } => sign * (1.0 + j.abs() as f64).powf(-2.0 / p),
            Self::LowerLp { p, epsilon } => {
                if j >= 0 {
                    0.0
                } else {
                    sign * ((-j) as f64).powf(-1.0 / (p - epsilon))
                }
            }
            Self::LowerLinf => sign,
        }
    }

    /// The exponent of `log(2/r)` in the law: `1/p'`, `1/(p - eps)'` or 1.
    pub fn law_exponent(&self) -> f64 {
        match *self {
            Self::Upper { p } => inverse_conjugate(p),
            Self::LowerLp { p, epsilon } => inverse_conjugate(p - epsilon),
            Self::LowerLinf => 1.0,
        }
    }

    /// Accepted range of the fitted exponent.
    pub fn exponent_band(&self) -> (f64, f64) {
        match *self {
            Self::Upper { p } => (-0.15, inverse_conjugate(p) + 0.15),
            Self::LowerLp { p, epsilon } => (inverse_conjugate(p) - 0.2, inverse_conjugate(p - epsilon) + 0.2),
            Self::LowerLinf => (0.8, 1.2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GrowthExample {
    pub base: f64,
    pub preset: GrowthPreset,
    /// Sampled `f` on the requested grid (a snapshot; measurements use the exact bands).
    pub f: SpaceTimeGrid,
    pub a: LacunarySequence,
    pub v: MultiplierSequence,
    amplitude: f64,
}

/// The staircase with base `a_base`, `a_j = a_base^j` on `[-M, M + 1]` and the
/// preset's `v_j` on `[-M, M]`. The grid must be one-dimensional and resolve the
/// rectangles down to index `k_min`.
pub fn build_growth_example_2d(
    a_base: f64,
    preset: GrowthPreset,
    big_m: i64,
    grid: &GridParams,
    k_min: i64,
) -> Result<GrowthExample> {
    preset.validate()?;
    if !(a_base > 1.0 && a_base.is_finite()) {
        return Err(Error::Domain(format!("base must exceed 1, got {a_base}")));
    }
    if big_m < 1 || k_min > 0 {
        return Err(Error::Domain(format!("need M >= 1 and k_min <= 0, got M = {big_m}, k_min = {k_min}")));
    }
    if grid.n != 1 {
        return Err(Error::Domain("growth examples live in one space dimension".into()));
    }
    if 2.0 * (big_m + 1) as f64 * a_base.ln() > MAX_LN_SCALE {
        return Err(Error::Domain(format!("scales a^(+-2(M+1)) leave double range for a = {a_base}, M = {big_m}")));
    }
    let shrink = 1.0 - 1.0 / a_base;
    let wx = a_base.powi(k_min as i32) * shrink;
    let wt = a_base.powi(2 * k_min as i32) * shrink;
    if wx < 2.0 * grid.dx() || wt < 2.0 * grid.dt() {
        return Err(Error::Resolution(format!(
            "rectangle k = {k_min} ({wx:.3e} x {wt:.3e}) with steps {:.3e} x {:.3e}",
            grid.dx(),
            grid.dt()
        )));
    }
    let f = grid.sample(|x, t| staircase_profile(a_base, x[0], t))?;
    let a = make_lacunary(SequenceKind::Geometric(a_base), a_base, -big_m, big_m + 1)?;
    let v = MultiplierSequence::from_fn(-big_m, big_m, |j| preset.weight(j))?;
    Ok(GrowthExample { base: a_base, preset, f, a, v, amplitude: 1.0 })
}

impl GrowthExample {
    pub fn big_m(&self) -> i64 {
        self.v.j_max()
    }

    /// The same construction with `f` replaced by 0.
    pub fn zeroed(&self) -> Self {
        let f = self.f.with_values(vec![0.0; self.f.values().len()]).expect("same geometry");
        Self { f, amplitude: 0.0, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    /// `T_M^* f(x, t)`.
    pub fn maximal_at(&self, alpha: f64, x: f64, t: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let d = staircase_differences(self.base, alpha, self.big_m(), x, t)?;
        Ok(window_sup(self.v.values(), &d))
    }

    /// `T_M^* f` on the grid of `f`.
    pub fn maximal_snapshot(&self, alpha: f64) -> Result<SpaceTimeGrid> {
        let f = &self.f;
        let pts: Vec<(f64, f64)> = (0..f.nt()).flat_map(|k| (0..f.nx()).map(move |i| (f.x(i), f.t(k)))).collect();
        let vals = pts.par_iter().map(|&(x, t)| self.maximal_at(alpha, x, t)).collect::<Result<Vec<f64>>>()?;
        f.with_values(vals)
    }

    /// Largest `eta` in `0.99, 0.98, ..., 0.01` with `P_1 f(h, h) >= P_1 f(0, 0)/2`
    /// at 41 equispaced `h in [-eta, eta]`, together with `P_1 f(0, 0)`.
    pub fn eta0(&self, alpha: f64) -> Result<(f64, f64)> {
        let c1 = staircase_band_integral(self.base, alpha, 0.0)?;
        if !(c1 > 0.0) {
            return Err(Error::SearchFailure(format!("base {} gives a non-positive central integral", self.base)));
        }
        for k in (1..=99).rev() {
            let eta = k as f64 / 100.0;
            let mut ok = true;
            for i in 0..41 {
                let h = -eta + 2.0 * eta * i as f64 / 40.0;
                if staircase_band_integral(self.base, alpha, h)? < 0.5 * c1 {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok((eta, c1));
            }
        }
        Err(Error::SearchFailure(format!("no admissibility radius for base {}", self.base)))
    }
}

/// `J0 = round(log(r/eta0) / (2 log a))`.
pub fn growth_j0(r: f64, eta0: f64, a: f64) -> i64 {
    ((r / eta0).ln() / (2.0 * a.ln())).round() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub r: f64,
    pub average: f64,
    pub j0: i64,
    pub valid_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub preset: GrowthPreset,
    pub rows: Vec<GrowthRow>,
    pub eta0: f64,
    pub fit: Option<SlopeFit>,
    pub band: (f64, f64),
    pub law_exponent: f64,
    pub notes: Vec<String>,
}

impl GrowthReport {
    pub fn beta(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn pass(&self) -> bool {
        self.beta().is_some_and(|b| b >= self.band.0 && b <= self.band.1)
    }

    /// Header `r,log_2_over_r,average,j0,valid_fraction`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["r", "log_2_over_r", "average", "j0", "valid_fraction"])?;
        for r in &self.rows {
            wr.write_record([
                r.r.to_string(),
                (2.0 / r.r).ln().to_string(),
                r.average.to_string(),
                r.j0.to_string(),
                r.valid_fraction.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = format!("preset {:?}: law exponent {:.4}, eta0 {:.2}\n", self.preset, self.law_exponent, self.eta0);
        match self.fit {
            Some(f) => out.push_str(&format!(
                "fitted beta {:.4} (r2 {:.4}) in [{:.4}, {:.4}] {}\n",
                f.slope,
                f.r2,
                self.band.0,
                self.band.1,
                if self.pass() { "PASS" } else { "FAIL" }
            )),
            None => out.push_str("fitted beta: none FAIL\n"),
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// `a^{2(M+1)}` must stay below `1e300` so that `a^{-2(M+1)}` stays normal.
const MAX_LN_SCALE: f64 = 690.0;

/// Share of valid points below which a radius is left out of the fit.
const MIN_VALID: f64 = 0.95;

/// Averages of `T_M^* f` over `[-r, r]^2` (midpoint rule, `q x q` points) and the
/// fit of `ln(average)` against `ln ln(2/r)`.
///
/// Every radius must satisfy `0 < 2r < 1`, radii must decrease, and `M` must
/// reach `|J0|` of the smallest radius.
pub fn growth_experiment(ex: &GrowthExample, alpha: f64, radii: &[f64], q: usize) -> Result<GrowthReport> {
    if radii.len() < 4 {
        return Err(Error::FitRefused(format!("need at least 4 radii, got {}", radii.len())));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && 2.0 * **r < 1.0)) {
        return Err(Error::Domain(format!("radius {r} violates 0 < 2r < 1")));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("radii must be strictly decreasing".into()));
    }
    if q == 0 {
        return Err(Error::Domain("need at least one sample per side".into()));
    }
    let (eta0, _) = ex.eta0(alpha)?;
    let j0_min = growth_j0(*radii.last().unwrap(), eta0, ex.base);
    if -j0_min > ex.big_m() {
        return Err(Error::Domain(format!("M = {} does not reach J0 = {j0_min}", ex.big_m())));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let pts: Vec<(f64, f64)> = (0..q * q)
            .map(|i| {
                let cx = (i % q) as f64 + 0.5;
                let ct = (i / q) as f64 + 0.5;
                (-r + 2.0 * r * cx / q as f64, -r + 2.0 * r * ct / q as f64)
            })
            .collect();
        let vals = pts.par_iter().map(|&(x, t)| ex.maximal_at(alpha, x, t)).collect::<Result<Vec<f64>>>()?;
        let valid: Vec<f64> = vals.into_iter().filter(|v| v.is_finite()).collect();
        let valid_fraction = valid.len() as f64 / (q * q) as f64;
        let average = if valid.is_empty() { 0.0 } else { valid.iter().sum::<f64>() / valid.len() as f64 };
        rows.push(GrowthRow { r, average, j0: growth_j0(r, eta0, ex.base), valid_fraction });
    }
    let mut notes = Vec::new();
    let used: Vec<&GrowthRow> = rows.iter().filter(|r| r.valid_fraction >= MIN_VALID).collect();
    if used.len() < rows.len() {
        notes.push(format!("{} radii dropped for validity below 95%", rows.len() - used.len()));
    }
    let fit = if ex.is_zero() || rows.iter().all(|r| r.average == 0.0) {
        notes.push("f is identically zero: all averages vanish, fit refused".into());
        None
    } else {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            used.iter().filter(|r| r.average > 0.0).map(|r| ((2.0 / r.r).ln().ln(), r.average.ln())).unzip();
        match fit_line(&xs, &ys) {
            Ok(f) => Some(f),
            Err(e) => {
                notes.push(format!("fit refused: {e}"));
                None
            }
        }
    };
    Ok(GrowthReport {
        preset: ex.preset,
        rows,
        eta0,
        fit,
        band: ex.preset.exponent_band(),
        law_exponent: ex.preset.law_exponent(),
        notes,
    })
}
