use rayon::prelude::*;

use crate::transforms::SpaceTimeGrid;

/// Dyadic radii `X 2^{-k}` down to the spatial step.
pub fn bmo_radii(f: &SpaceTimeGrid) -> Vec<f64> {
    let mut r = f.x_extent();
    let mut out = Vec::new();
    while r >= f.dx() * (1.0 - 1e-12) {
        out.push(r);
        r *= 0.5;
    }
    out
}

/// `sup` over cylinders `{|x - x0| <= r, |t - t0| <= r^2}` clipped to the box,
/// anchored at every grid point and with every radius from [`bmo_radii`], of the
/// sample mean of `|f - mean f|`.
pub fn bmo_norm(f: &SpaceTimeGrid) -> f64 {
    let radii = bmo_radii(f);
    let nx = f.nx() as i64;
    let nt = f.nt() as i64;
    let n = f.n();
    let (dx, dt) = (f.dx(), f.dt());
    let vals = f.values();
    let anchors = f.values().len();
    let m = f.slice_len();
    (0..anchors)
        .into_par_iter()
        .map(|idx| {
            let k0 = (idx / m) as i64;
            let s0 = idx % m;
            let (c0, c1) = if n == 1 { (s0 as i64, 0) } else { ((s0 / f.nx()) as i64, (s0 % f.nx()) as i64) };
            let mut best = 0.0f64;
            let mut members: Vec<f64> = Vec::new();
            for &r in &radii {
                let rf = r / dx * (1.0 + 1e-12);
                let ri = rf.floor() as i64;
                let rt = (r * r / dt * (1.0 + 1e-12)).floor() as i64;
                members.clear();
                for k in (k0 - rt).max(0)..=(k0 + rt).min(nt - 1) {
                    let base = k as usize * m;
                    if n == 1 {
                        for i in (c0 - ri).max(0)..=(c0 + ri).min(nx - 1) {
                            members.push(vals[base + i as usize]);
                        }
                    } else {
                        for i in (c0 - ri).max(0)..=(c0 + ri).min(nx - 1) {
                            let di = i - c0;
                            let half = (rf * rf - (di * di) as f64).sqrt().floor() as i64;
                            for j in (c1 - half).max(0)..=(c1 + half).min(nx - 1) {
                                members.push(vals[base + i as usize * f.nx() + j as usize]);
                            }
                        }
                    }
                }
                let len = members.len() as f64;
                let mean = members.iter().sum::<f64>() / len;
                let osc = members.iter().map(|v| (v - mean).abs()).sum::<f64>() / len;
                best = best.max(osc);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}
