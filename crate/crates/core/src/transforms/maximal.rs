//! Hardy-Littlewood maximal operators on grids. Sups run over windows
//! anchored at grid points and clipped to the box; averages are sample means.

use rayon::prelude::*;

use super::grid::SpaceTimeGrid;
use crate::error::{Error, Result};

fn check_q(q: f64) -> Result<()> {
    if q >= 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must be at least 1, got {q}")))
    }
}

fn power(v: f64, q: f64) -> f64 {
    if q == 1.0 {
        v.abs()
    } else {
        v.abs().powf(q)
    }
}

fn root(v: f64, q: f64) -> f64 {
    if q == 1.0 {
        v
    } else {
        v.powf(1.0 / q)
    }
}

/// Sup over intervals `[i0, i1]` containing each index of the mean of `a`.
fn interval_sup(a: &[f64]) -> Vec<f64> {
    let m = a.len();
    let mut prefix = vec![0.0; m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i] + a[i];
    }
    let mut out = vec![0.0f64; m];
    let mut from_right = vec![0.0f64; m];
    for i0 in 0..m {
        let mut best = f64::NEG_INFINITY;
        for i1 in (i0..m).rev() {
            let avg = (prefix[i1 + 1] - prefix[i0]) / (i1 - i0 + 1) as f64;
            best = best.max(avg);
            from_right[i1] = best;
        }
        for i in i0..m {
            out[i] = out[i].max(from_right[i]);
        }
    }
    out
}

/// `M_q f(x, t) = sup_{B containing x} (mean_B |f(., t)|^q)^{1/q}` at fixed `t`.
///
/// In one dimension the balls are all grid intervals. In two dimensions they are
/// discrete disks with grid centers and radii `k dx`; this costs `O(nx^5)` per slice.
pub fn hl_maximal(f: &SpaceTimeGrid, q: f64) -> Result<SpaceTimeGrid> {
    check_q(q)?;
    let nx = f.nx();
    let slices: Vec<Vec<f64>> = (0..f.nt())
        .into_par_iter()
        .map(|k| {
            let a: Vec<f64> = f.slice(k).iter().map(|v| power(*v, q)).collect();
            let sup = if f.n() == 1 { interval_sup(&a) } else { disk_sup(&a, nx) };
            sup.into_iter().map(|v| root(v, q)).collect()
        })
        .collect();
    Ok(f.with_values_unchecked(slices.concat(), f.mask().map(|m| m.to_vec())))
}

fn disk_sup(a: &[f64], nx: usize) -> Vec<f64> {
    let mut row_prefix = vec![0.0; nx * (nx + 1)];
    for i in 0..nx {
        for j in 0..nx {
            row_prefix[i * (nx + 1) + j + 1] = row_prefix[i * (nx + 1) + j] + a[i * nx + j];
        }
    }
    let r_max = ((2.0f64).sqrt() * nx as f64).ceil() as i64;
    let n = nx as i64;
    let mut out = vec![0.0f64; nx * nx];
    for ci in 0..n {
        for cj in 0..n {
            for r in 0..=r_max {
                let r2 = r * r;
                let mut sum = 0.0;
                let mut count = 0usize;
                let mut rows = Vec::new();
                for i in (ci - r).max(0)..=(ci + r).min(n - 1) {
                    let di = i - ci;
                    let half = ((r2 - di * di) as f64).sqrt().floor() as i64;
                    let lo = (cj - half).max(0);
                    let hi = (cj + half).min(n - 1);
                    if lo > hi {
                        continue;
                    }
                    let base = i as usize * (nx + 1);
                    sum += row_prefix[base + hi as usize + 1] - row_prefix[base + lo as usize];
                    count += (hi - lo + 1) as usize;
                    rows.push((i, lo, hi));
                }
                let avg = sum / count as f64;
                for (i, lo, hi) in rows {
                    for j in lo..=hi {
                        let o = &mut out[i as usize * nx + j as usize];
                        *o = o.max(avg);
                    }
                }
            }
        }
    }
    out
}

/// `M_q^- f(x, t) = sup_{eps > 0} (eps^{-1} int_{-eps}^0 |f(x, t + s)|^q ds)^{1/q}`,
/// with `eps` running over grid offsets and averages over the samples
/// `t - eps, ..., t`.
pub fn backward_maximal(f: &SpaceTimeGrid, q: f64) -> Result<SpaceTimeGrid> {
    check_q(q)?;
    let m = f.slice_len();
    let nt = f.nt();
    let vals = f.values();
    let columns: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|s| {
            let a: Vec<f64> = (0..nt).map(|k| power(vals[k * m + s], q)).collect();
            let mut out = vec![0.0; nt];
            for k in 0..nt {
                let mut sum = 0.0;
                let mut best = 0.0f64;
                for back in 0..=k {
                    sum += a[k - back];
                    best = best.max(sum / (back + 1) as f64);
                }
                out[k] = root(best, q);
            }
            out
        })
        .collect();
    let mut values = vec![0.0; m * nt];
    for (s, col) in columns.iter().enumerate() {
        for k in 0..nt {
            values[k * m + s] = col[k];
        }
    }
    Ok(f.with_values_unchecked(values, f.mask().map(|m| m.to_vec())))
}
