//! FFT machinery shared by the heat and subordinated operators.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::{Boundary, SpaceTimeGrid};
use super::lattice::{bin_angle, bin_class, lattice_symbol};
use crate::error::Result;
use crate::quadrature::{adaptive_gk_vec, QuadratureRule};

/// Spatial padding in units of the widest Gaussian standard scale `sqrt(s)`.
const PAD_WIDTHS: f64 = 11.0;

fn smooth_size(min: usize) -> usize {
    let mut m = min.max(8);
    loop {
        let mut r = m;
        for f in [2, 3, 5] {
            while r % f == 0 {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Circular convolution on a padded box of side `p`.
#[derive(Clone)]
pub(crate) struct SpatialFft {
    pub n: usize,
    pub nx: usize,
    pub p: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Symmetry class of every bin, flattened over `C^n` with `C = p/2 + 1`.
    bin_to_class: Vec<u32>,
}

impl SpatialFft {
    pub fn new(n: usize, nx: usize, dx: f64, s_max: f64) -> Self {
        let pad = (PAD_WIDTHS * s_max.max(0.0).sqrt() / dx).ceil() as usize + 2;
        let p = smooth_size(nx + 2 * pad);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(p);
        let inv = planner.plan_fft_inverse(p);
        let c = p / 2 + 1;
        let bins = p.pow(n as u32);
        let bin_to_class = (0..bins)
            .map(|b| {
                if n == 1 {
                    bin_class(b, p) as u32
                } else {
                    (bin_class(b / p, p) * c + bin_class(b % p, p)) as u32
                }
            })
            .collect();
        Self { n, nx, p, fwd, inv, bin_to_class }
    }

    /// Number of one-dimensional symmetry classes.
    pub fn classes_1d(&self) -> usize {
        self.p / 2 + 1
    }

    /// Number of multiplier entries (`C^n`).
    pub fn classes(&self) -> usize {
        self.classes_1d().pow(self.n as u32)
    }

    pub fn class_of(&self, bin: usize) -> usize {
        self.bin_to_class[bin] as usize
    }

    /// Angles of the one-dimensional classes.
    pub fn angles(&self) -> Vec<f64> {
        (0..self.classes_1d()).map(|c| bin_angle(c, self.p)).collect()
    }

    fn source(&self, j: usize, boundary: Boundary) -> Option<usize> {
        let nx = self.nx;
        if j < nx {
            return Some(j);
        }
        match boundary {
            Boundary::Zero => None,
            Boundary::Extend => {
                let h = (self.p - nx) / 2;
                Some(if j < nx + h { nx - 1 } else { 0 })
            }
        }
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        plan.process(buf);
        if self.n == 2 {
            let p = self.p;
            transpose(buf, p);
            plan.process(buf);
            transpose(buf, p);
        }
    }

    pub fn forward(&self, slice: &[f64], boundary: Boundary) -> Vec<Complex64> {
        let p = self.p;
        let nx = self.nx;
        let mut buf = vec![Complex64::new(0.0, 0.0); p.pow(self.n as u32)];
        if self.n == 1 {
            for (j, b) in buf.iter_mut().enumerate() {
                if let Some(i) = self.source(j, boundary) {
                    b.re = slice[i];
                }
            }
        } else {
            for j1 in 0..p {
                let Some(i1) = self.source(j1, boundary) else { continue };
                for j2 in 0..p {
                    if let Some(i2) = self.source(j2, boundary) {
                        buf[j1 * p + j2].re = slice[i1 * nx + i2];
                    }
                }
            }
        }
        self.transform(&mut buf, &self.fwd);
        buf
    }

    /// Inverse transform, cropped to the box.
    pub fn inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut buf, &self.inv);
        let p = self.p;
        let nx = self.nx;
        let scale = 1.0 / buf.len() as f64;
        if self.n == 1 {
            buf[..nx].iter().map(|z| z.re * scale).collect()
        } else {
            let mut out = Vec::with_capacity(nx * nx);
            for i1 in 0..nx {
                out.extend(buf[i1 * p..i1 * p + nx].iter().map(|z| z.re * scale));
            }
            out
        }
    }

    /// Fills `out[class]` with the product symbol of the lattice Gaussian at time `s`.
    pub fn symbols(&self, s: f64, dx: f64, angles: &[f64], one_d: &mut [f64], out: &mut [f64]) {
        for (o, &th) in one_d.iter_mut().zip(angles) {
            *o = lattice_symbol(th, s, dx);
        }
        if self.n == 1 {
            out.copy_from_slice(one_d);
        } else {
            let c = one_d.len();
            for i in 0..c {
                for j in 0..c {
                    out[i * c + j] = one_d[i] * one_d[j];
                }
            }
        }
    }
}

fn transpose(buf: &mut [Complex64], p: usize) {
    for i in 0..p {
        for j in i + 1..p {
            buf.swap(i * p + j, j * p + i);
        }
    }
}

/// Precomputed time moments for `f -> int_0^{t - T0} w(s) G_s * f(., t - s) ds`
/// with linear interpolation between time slices.
///
/// With `A_l`, `B_l` the moments of `w(s) G_s` against `1` and `(s - l dt)/dt`
/// on the interval `[l dt, (l + 1) dt]`, output slice `k` is
/// `sum_{l<k} e_l f_{k-l} + B_{k-1} f_0`, where `e_0 = A_0 - B_0` and
/// `e_l = A_l - B_l + B_{l-1}`. Under [`Boundary::Extend`] the first slice
/// also continues into the past, adding `(int_{k dt}^inf w G_s) f_0`.
pub(crate) struct TimePlan {
    pub fft: SpatialFft,
    e: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    tail: Option<Vec<Vec<f64>>>,
    boundary: Boundary,
}

impl TimePlan {
    pub fn new<W>(geom: &SpaceTimeGrid, weight: W, boundary: Boundary, rule: &QuadratureRule) -> Result<Self>
    where
        W: Fn(f64) -> f64 + Sync,
    {
        let dx = geom.dx();
        let dt = geom.dt();
        let nt = geom.nt();
        let s_max = dt * (nt - 1) as f64;
        let fft = SpatialFft::new(geom.n(), geom.nx(), dx, s_max);
        let nc = fft.classes();
        let angles = fft.angles();
        let moments: Vec<(Vec<f64>, Vec<f64>)> = (0..nt - 1)
            .into_par_iter()
            .map(|l| {
                let lo = dt * l as f64;
                let one_d = RefCell::new(vec![0.0; angles.len()]);
                let sym = RefCell::new(vec![0.0; nc]);
                let (v, _) = adaptive_gk_vec(
                    |s, out| {
                        let w = weight(s);
                        if w == 0.0 {
                            out.iter_mut().for_each(|o| *o = 0.0);
                            return;
                        }
                        let u = (s - lo) / dt;
                        let mut one_d = one_d.borrow_mut();
                        let mut sym = sym.borrow_mut();
                        fft.symbols(s, dx, &angles, &mut one_d, &mut sym);
                        for c in 0..nc {
                            out[c] = w * sym[c];
                            out[nc + c] = w * sym[c] * u;
                        }
                    },
                    2 * nc,
                    lo,
                    lo + dt,
                    2,
                    rule,
                )?;
                Ok((v[..nc].to_vec(), v[nc..].to_vec()))
            })
            .collect::<Result<_>>()?;
        let (a, b): (Vec<Vec<f64>>, Vec<Vec<f64>>) = moments.into_iter().unzip();
        let e: Vec<Vec<f64>> = (0..nt - 1)
            .map(|l| {
                (0..nc)
                    .map(|c| {
                        let prev = if l == 0 { 0.0 } else { b[l - 1][c] };
                        a[l][c] - b[l][c] + prev
                    })
                    .collect()
            })
            .collect();
        let tail = match boundary {
            Boundary::Zero => None,
            Boundary::Extend => {
                let far = far_tail(&fft, &weight, s_max, dx, &angles, rule)?;
                let mut r = vec![far; nt];
                for k in (0..nt - 1).rev() {
                    for c in 0..nc {
                        r[k][c] = r[k + 1][c] + a[k][c];
                    }
                }
                Some(r)
            }
        };
        Ok(Self { fft, e, b, tail, boundary })
    }

    /// Applies the plan to the values of `f` (same geometry as the plan).
    pub fn apply(&self, f: &SpaceTimeGrid) -> Vec<f64> {
        self.apply_slices(f, self.boundary, self.tail.is_some())
    }

    /// Mass of the kernel captured inside the box at every point.
    pub fn captured_mass(&self, geom: &SpaceTimeGrid) -> Vec<f64> {
        let ones = geom.with_values_unchecked(vec![1.0; geom.values().len()], None);
        self.apply_slices(&ones, Boundary::Zero, false)
    }

    fn apply_slices(&self, f: &SpaceTimeGrid, boundary: Boundary, with_tail: bool) -> Vec<f64> {
        let nt = f.nt();
        let spectra: Vec<Option<Vec<Complex64>>> = (0..nt)
            .into_par_iter()
            .map(|k| {
                let sl = f.slice(k);
                if sl.iter().all(|v| *v == 0.0) && boundary == Boundary::Zero {
                    None
                } else {
                    Some(self.fft.forward(sl, boundary))
                }
            })
            .collect();
        let bins = self.fft.p.pow(self.fft.n as u32);
        let slices: Vec<Vec<f64>> = (0..nt)
            .into_par_iter()
            .map(|k| {
                let mut acc = vec![Complex64::new(0.0, 0.0); bins];
                let mut any = false;
                let mut add = |mult: &[f64], spec: &Option<Vec<Complex64>>| {
                    if let Some(sp) = spec {
                        any = true;
                        for (bin, (a, z)) in acc.iter_mut().zip(sp).enumerate() {
                            *a += z * mult[self.fft.class_of(bin)];
                        }
                    }
                };
                for l in 0..k {
                    add(&self.e[l], &spectra[k - l]);
                }
                if k >= 1 {
                    add(&self.b[k - 1], &spectra[0]);
                }
                if with_tail {
                    if let Some(t) = &self.tail {
                        add(&t[k], &spectra[0]);
                    }
                }
                if any {
                    self.fft.inverse(acc)
                } else {
                    vec![0.0; f.slice_len()]
                }
            })
            .collect();
        slices.concat()
    }
}

/// `int_{s0}^inf w(s) G_s ds` per class, integrated in `log s`.
fn far_tail<W: Fn(f64) -> f64>(
    fft: &SpatialFft,
    weight: &W,
    s0: f64,
    dx: f64,
    angles: &[f64],
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let mut x_max = 10.0;
    while x_max < 700.0 {
        let s = s0 * f64::exp(x_max);
        if (weight(s) * s).abs() < 1e-17 {
            break;
        }
        x_max += 10.0;
    }
    let nc = fft.classes();
    let one_d = RefCell::new(vec![0.0; angles.len()]);
    let sym = RefCell::new(vec![0.0; nc]);
    let panels = (x_max / 2.0).ceil() as usize;
    let (v, _) = adaptive_gk_vec(
        |x, out| {
            let s = s0 * x.exp();
            let w = weight(s) * s;
            if w == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                return;
            }
            let mut one_d = one_d.borrow_mut();
            let mut sym = sym.borrow_mut();
            fft.symbols(s, dx, angles, &mut one_d, &mut sym);
            for c in 0..nc {
                out[c] = w * sym[c];
            }
        },
        nc,
        0.0,
        x_max,
        panels,
        rule,
    )?;
    Ok(v)
}
