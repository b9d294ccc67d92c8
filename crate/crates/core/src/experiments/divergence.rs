//! The divergence example: `f(x, t) = g(t)` with `g` alternating on the time
//! bands `(-a^{2k+1}, -a^{2k}]`, `a_j = a^j`, `v_j = (-1)^{j+1}`.
//!
//! Because `f` does not depend on `x`, `P_{a_j} f(x, t)` reduces to a one-dimensional
//! integral of `g` against `e^{-1/(4u)} u^{-a-1}`. The sampled path integrates the
//! grid values of `g` cell by cell inside the time window and the exact bands
//! outside it, so the heavy `s^{-1-a}` tail is never truncated.

use std::io::Write;

use super::bands::{band_mass, band_sum_in, divergence_profile, BaseChoice};
use super::config::GridParams;
use crate::error::{Error, Result};
use crate::kernels::poisson_constant;
use crate::sequences::{make_lacunary, LacunarySequence, MultiplierSequence, SequenceKind};
use crate::transforms::SpaceTimeGrid;
use crate::verify::{fit_line, SlopeFit};

/// Bands must carry at least this many time samples.
const SAMPLES_PER_BAND: f64 = 4.0;
const INCREMENT_SLACK: f64 = 0.15;

#[derive(Debug, Clone)]
pub struct DivergenceExample {
    pub base: f64,
    pub f: SpaceTimeGrid,
    pub a: LacunarySequence,
    pub v: MultiplierSequence,
}

/// Samples `g` on `grid` and builds `a_j`, `v_j` for `j in j_range` (with `a` up to `j_max + 1`).
///
/// Every band `k >= j_min - 1` meeting the time window must span four samples.
pub fn build_divergence_example(a_base: f64, grid: &GridParams, j_range: (i64, i64)) -> Result<DivergenceExample> {
    if !(a_base > 1.0 && a_base.is_finite()) {
        return Err(Error::Domain(format!("base must exceed 1, got {a_base}")));
    }
    let (j_min, j_max) = j_range;
    if j_min > j_max {
        return Err(Error::Domain(format!("empty scale window {j_range:?}")));
    }
    let (t0, t1) = grid.t_range;
    // narrowest band that meets the window and is needed by the scales
    let mut k = j_min - 1;
    if t1 < 0.0 {
        let reach = (((-t1).ln() / a_base.ln() - 1.0) / 2.0).floor() as i64;
        k = k.max(reach);
    }
    let width = a_base.powi(2 * k as i32) * (a_base - 1.0);
    let in_window = -a_base.powi(2 * k as i32 + 1) < t1 && -a_base.powi(2 * k as i32) >= t0;
    if in_window && width < SAMPLES_PER_BAND * grid.dt() {
        return Err(Error::Resolution(format!(
            "band k = {k} of width {width:.3e} with time step {:.3e}",
            grid.dt()
        )));
    }
    let f = grid.sample(|_, t| divergence_profile(a_base, t))?;
    let a = make_lacunary(SequenceKind::Geometric(a_base), a_base, j_min, j_max + 1)?;
    let v = MultiplierSequence::from_fn(j_min, j_max, |j| if j % 2 == 0 { -1.0 } else { 1.0 })?;
    Ok(DivergenceExample { base: a_base, f, a, v })
}

impl DivergenceExample {
    /// `P_{a_j} f(., t)` from the sampled `g` inside the time window and the exact
    /// bands outside it. Cells are centred on the samples.
    pub fn scale_value(&self, alpha: f64, j: i64, t: f64) -> f64 {
        let scale = self.base.powi(2 * j as i32);
        let (t0, t1) = self.f.t_range();
        let dt = self.f.dt();
        let m = self.f.slice_len();
        let vals = self.f.values();
        let mut total = band_sum_in(self.base, alpha, t, scale, f64::NEG_INFINITY, t0)
            + band_sum_in(self.base, alpha, t, scale, t1, f64::INFINITY);
        for k in 0..self.f.nt() {
            let g = vals[k * m];
            if g == 0.0 {
                continue;
            }
            let c = self.f.t(k);
            let lo = (c - 0.5 * dt).max(t0);
            let hi = (c + 0.5 * dt).min(t1).min(t);
            if hi <= lo {
                continue;
            }
            total += g * band_mass(alpha, (t - hi) / scale, (t - lo) / scale);
        }
        poisson_constant(alpha) * total
    }

    /// `P_{a_j} f(., t)` with no sampling: `(-1)^j c I(t / a^{2j})`.
    pub fn exact_scale_value(&self, alpha: f64, j: i64, t: f64) -> f64 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * poisson_constant(alpha) * super::bands::shifted_band_integral(self.base, alpha, t / self.base.powi(2 * j as i32))
    }
}

/// Probe times `eta0 a^{2 j_min} (-0.9 + 1.8 i/(count - 1))`.
pub fn divergence_probes(choice: &BaseChoice, j_min: i64, count: usize) -> Vec<f64> {
    let reach = choice.eta0 * choice.a.powi(2 * j_min as i32);
    (0..count)
        .map(|i| reach * (-0.9 + 1.8 * i as f64 / (count.max(2) - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceRow {
    pub window: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub probes: Vec<f64>,
    /// `increments[p][i] = v_j (P_{a_{j+1}} - P_{a_j}) f` at probe `p`, `j = j_min + i`.
    pub increments: Vec<Vec<f64>>,
    pub rows: Vec<DivergenceRow>,
    /// `C1 / (4^a Gamma(a))`: every admissible increment is at least this.
    pub threshold: f64,
    pub min_increment: f64,
    pub fit: Option<SlopeFit>,
    pub notes: Vec<String>,
}

impl DivergenceReport {
    pub fn growth_ok(&self) -> bool {
        self.fit.is_some_and(|f| f.slope > 0.0 && f.r2 > 0.9)
    }

    pub fn increments_ok(&self) -> bool {
        self.min_increment >= (1.0 - INCREMENT_SLACK) * self.threshold
    }

    pub fn pass(&self) -> bool {
        self.growth_ok() && self.increments_ok()
    }

    /// Header `window,mean_partial_sum,min_partial_sum,max_partial_sum`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["window", "mean_partial_sum", "min_partial_sum", "max_partial_sum"])?;
        for r in &self.rows {
            wr.write_record([r.window.to_string(), r.mean.to_string(), r.min.to_string(), r.max.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        match &self.fit {
            Some(f) => out.push_str(&format!(
                "partial sums vs window: slope={:.6} r2={:.6} {}\n",
                f.slope,
                f.r2,
                if self.growth_ok() { "PASS" } else { "FAIL" }
            )),
            None => out.push_str("partial sums vs window: no fit FAIL\n"),
        }
        out.push_str(&format!(
            "min increment {:.6} vs threshold C1/(4^a Gamma(a)) = {:.6} (15% slack) {}\n",
            self.min_increment,
            self.threshold,
            if self.increments_ok() { "PASS" } else { "FAIL" }
        ));
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Partial sums `sum_{j = j_min}^{j_min + W - 1} v_j (P_{a_{j+1}} - P_{a_j}) f(x, t)`
/// at every probe, from the sampled path, for each `W` in `windows`.
///
/// Probes must satisfy `|t| < eta0 a^{2 j_min}` so that every `j >= j_min` is
/// admissible, and `W` may not exceed the scale window.
pub fn divergence_growth(
    ex: &DivergenceExample,
    alpha: f64,
    choice: &BaseChoice,
    windows: &[usize],
    probes: &[f64],
) -> Result<DivergenceReport> {
    let j_min = ex.v.j_min();
    let count = (ex.v.j_max() - j_min + 1) as usize;
    let reach = choice.eta0 * ex.base.powi(2 * j_min as i32);
    if let Some(t) = probes.iter().find(|t| t.abs() >= reach) {
        return Err(Error::Domain(format!("probe t = {t} is not admissible (|t| must be below {reach:.4e})")));
    }
    let w_max = windows.iter().copied().max().unwrap_or(0);
    if w_max > count {
        return Err(Error::Domain(format!("window {w_max} exceeds the {count} available scales")));
    }
    let increments: Vec<Vec<f64>> = probes
        .iter()
        .map(|&t| {
            let p: Vec<f64> = (0..=w_max as i64).map(|i| ex.scale_value(alpha, j_min + i, t)).collect();
            (0..w_max as i64).map(|i| ex.v.v(j_min + i) * (p[i as usize + 1] - p[i as usize])).collect()
        })
        .collect();
    let rows: Vec<DivergenceRow> = windows
        .iter()
        .map(|&w| {
            // + 0.0 turns the empty sum -0.0 into 0.0
            let sums: Vec<f64> = increments.iter().map(|inc| inc[..w].iter().sum::<f64>() + 0.0).collect();
            let n = sums.len().max(1) as f64;
            DivergenceRow {
                window: w,
                mean: sums.iter().sum::<f64>() / n,
                min: sums.iter().copied().fold(f64::INFINITY, f64::min),
                max: sums.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    let mut notes = Vec::new();
    let xs: Vec<f64> = rows.iter().map(|r| r.window as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let fit = match fit_line(&xs, &ys) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("no fit: {e}"));
            None
        }
    };
    let min_increment = increments.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok(DivergenceReport {
        probes: probes.to_vec(),
        increments,
        rows,
        threshold: poisson_constant(alpha) * choice.c1,
        min_increment,
        fit,
        notes,
    })
}
