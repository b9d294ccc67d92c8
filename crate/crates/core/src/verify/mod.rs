//! Numerical checks of the kernel, multiplier, Cotlar and convergence
//! estimates. Scans report the sampled supremum of a ratio; they never claim
//! the true constant.

mod bmo;
mod cotlar;
mod kernel_scans;
mod lemma;
mod multiplier;
mod rates;

use std::io::Write;

use crate::error::{Error, Result};

pub use bmo::{bmo_norm, bmo_radii};
pub use cotlar::{check_cotlar, check_cotlar_with, CotlarParts};
pub use kernel_scans::{
    check_kernel_gradients, check_kernel_size, check_telescoping_mass, kernel_derivatives, kernel_sample_grid,
    telescoping_sum_abs,
};
pub use lemma::{lemma33_decay, lemma33_uniform_bound};
pub use multiplier::{
    multiplier_samples, multiplier_value, multiplier_value_physical, multiplier_value_with, scan_multiplier_bound,
    single_scale_multiplier,
};
pub use rates::{convergence_rates, ConvergenceReport, RateTemplate, TestBump};

/// Largest tolerated growth of a sampled supremum when the sampling is doubled.
pub const REFINEMENT_GROWTH: f64 = 0.25;

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::FitRefused(format!("need at least two paired points, got {}", x.len().min(y.len()))));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::FitRefused("non-finite data".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::FitRefused("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(SlopeFit { slope, intercept: my - slope * mx, r2 })
}

/// One scanned point.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: Vec<f64>,
    pub value: f64,
    pub ratio: f64,
    /// Skipped samples (e.g. a finite-difference step underflowed) carry no ratio.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub claimed_form: String,
    pub max_ratio: f64,
    pub fitted_constant: f64,
    pub n_samples: usize,
    pub n_skipped: usize,
    pub worst_point: Vec<f64>,
    pub slope_fit: Option<SlopeFit>,
    pub fail: bool,
    pub notes: Vec<String>,
    pub samples: Vec<Sample>,
}

impl BoundReport {
    /// Reduces samples in order: max ratio, ties broken by the lexicographically
    /// smallest point, so the result does not depend on evaluation order.
    pub fn from_samples(claimed_form: &str, samples: Vec<Sample>) -> Self {
        let mut best: Option<&Sample> = None;
        for s in samples.iter().filter(|s| !s.skipped) {
            best = match best {
                None => Some(s),
                Some(b) => {
                    let better = s.ratio > b.ratio
                        || (s.ratio == b.ratio && lex_less(&s.point, &b.point));
                    Some(if better { s } else { b })
                }
            };
        }
        let max_ratio = best.map_or(0.0, |b| b.ratio);
        let worst_point = best.map_or_else(Vec::new, |b| b.point.clone());
        let n_skipped = samples.iter().filter(|s| s.skipped).count();
        let fail = !max_ratio.is_finite();
        Self {
            claimed_form: claimed_form.to_string(),
            max_ratio,
            fitted_constant: max_ratio,
            n_samples: samples.len(),
            n_skipped,
            worst_point,
            slope_fit: None,
            fail,
            notes: Vec::new(),
            samples,
        }
    }

    /// Relative growth of `max_ratio` from `self` (coarse) to `finer`.
    pub fn refinement_growth(&self, finer: &BoundReport) -> f64 {
        if self.max_ratio == 0.0 {
            return if finer.max_ratio == 0.0 { 0.0 } else { f64::INFINITY };
        }
        finer.max_ratio / self.max_ratio - 1.0
    }

    /// Marks `finer` as failed when the supremum grew by more than 25%.
    pub fn refinement_stable(&self, finer: &BoundReport) -> bool {
        self.refinement_growth(finer) <= REFINEMENT_GROWTH
    }

    /// One row per sample: coordinates, value, ratio, skipped flag.
    pub fn write_csv<W: Write>(&self, w: W, coord_names: &[&str]) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = coord_names.iter().map(|s| s.to_string()).collect();
        header.extend(["value", "ratio", "skipped"].map(String::from));
        wr.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.point.iter().map(|v| v.to_string()).collect();
            row.push(s.value.to_string());
            row.push(s.ratio.to_string());
            row.push(s.skipped.to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: max_ratio={:.6e} n_samples={} skipped={} worst_point={:?}",
            self.claimed_form, self.max_ratio, self.n_samples, self.n_skipped, self.worst_point
        );
        if let Some(f) = &self.slope_fit {
            out.push_str(&format!(" slope={:.4} intercept={:.4} r2={:.4}", f.slope, f.intercept, f.r2));
        }
        out.push_str(if self.fail { " FAIL" } else { " ok" });
        for n in &self.notes {
            out.push_str(&format!("\n  note: {n}"));
        }
        out
    }
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    a.len() < b.len()
}
