use rayon::prelude::*;

use super::conv::{SpatialFft, TimePlan};
use super::grid::{Boundary, SpaceTimeGrid};
use super::lattice::{lattice_mass, lattice_weights};
use super::spec::{check_alpha, TransformFamily, TransformSpec};
use crate::error::{Error, Result};
use crate::kernels::{diff_time_weight, diff_transform_kernel, subordination_weight, KernelPoint};
use crate::quadrature::{integrate, QuadratureRule};

/// Captured kernel mass below which an output point is marked invalid.
pub const MASK_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct ApplyOptions {
    pub boundary: Boundary,
    /// Rule for the time moments of the kernel.
    pub rule: QuadratureRule,
    /// Compute the validity mask (costs one extra application).
    pub mask: bool,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        Self {
            boundary: Boundary::Zero,
            rule: QuadratureRule { max_evals: 10_000_000, ..QuadratureRule::adaptive(1e-13, 1e-12) },
            mask: true,
        }
    }
}

impl ApplyOptions {
    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn without_mask(mut self) -> Self {
        self.mask = false;
        self
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau must be positive, got {tau}")))
    }
}

fn mask_from(captured: &[f64]) -> Vec<bool> {
    captured.iter().map(|m| *m >= MASK_THRESHOLD).collect()
}

/// `e^{-tau(d/dt - Laplacian)} f`: the slice at `t - tau` (linearly interpolated
/// in time) convolved with the lattice Gaussian at time `tau`.
pub fn apply_heat(f: &SpaceTimeGrid, tau: f64) -> Result<SpaceTimeGrid> {
    apply_heat_with(f, tau, &ApplyOptions::default())
}

pub fn apply_heat_with(f: &SpaceTimeGrid, tau: f64, opts: &ApplyOptions) -> Result<SpaceTimeGrid> {
    check_tau(tau)?;
    let dt = f.dt();
    let dx = f.dx();
    let mut shift = tau / dt;
    if (shift - shift.round()).abs() < 1e-10 {
        shift = shift.round();
    }
    let l = shift.floor() as usize;
    let lam = shift - l as f64;
    let fft = SpatialFft::new(f.n(), f.nx(), dx, tau);
    let angles = fft.angles();
    let mut one_d = vec![0.0; angles.len()];
    let mut sym = vec![0.0; fft.classes()];
    fft.symbols(tau, dx, &angles, &mut one_d, &mut sym);
    let bins = fft.p.pow(f.n() as u32);
    let m = f.slice_len();
    let nt = f.nt();

    let source = |k: usize| -> Vec<f64> {
        let mut out = vec![0.0; m];
        let mut add = |idx: isize, w: f64| {
            if w == 0.0 {
                return;
            }
            let idx = if idx < 0 {
                match opts.boundary {
                    Boundary::Zero => return,
                    Boundary::Extend => 0,
                }
            } else {
                idx as usize
            };
            for (o, v) in out.iter_mut().zip(f.slice(idx)) {
                *o += w * v;
            }
        };
        let hi = k as isize - l as isize;
        add(hi, 1.0 - lam);
        add(hi - 1, lam);
        out
    };
    let convolve = |slice: &[f64], boundary: Boundary| -> Vec<f64> {
        let mut spec = fft.forward(slice, boundary);
        for (bin, z) in spec.iter_mut().enumerate().take(bins) {
            *z *= sym[fft.class_of(bin)];
        }
        fft.inverse(spec)
    };
    let slices: Vec<Vec<f64>> = (0..nt)
        .into_par_iter()
        .map(|k| {
            let src = source(k);
            if src.iter().all(|v| *v == 0.0) && opts.boundary == Boundary::Zero {
                vec![0.0; m]
            } else {
                convolve(&src, opts.boundary)
            }
        })
        .collect();
    let mask = opts.mask.then(|| {
        let spatial = convolve(&vec![1.0; m], Boundary::Zero);
        let mut mask = Vec::with_capacity(m * nt);
        for k in 0..nt {
            let in_time = k as f64 - shift >= -1e-12;
            mask.extend(spatial.iter().map(|c| in_time && *c >= MASK_THRESHOLD));
        }
        mask
    });
    Ok(f.with_values_unchecked(slices.concat(), mask))
}

/// Heat semigroup evaluated at one grid point for any `s > 0`, by direct
/// summation against the lattice Gaussian. Used to cross-check the
/// subordinated operators.
pub fn heat_at(f: &SpaceTimeGrid, ix: &[usize], k: usize, s: f64, boundary: Boundary) -> Result<f64> {
    check_tau(s)?;
    if ix.len() != f.n() || ix.iter().any(|&i| i >= f.nx()) || k >= f.nt() {
        return Err(Error::Domain("grid point out of range".into()));
    }
    let pos = k as f64 - s / f.dt();
    let (lo, lam) = if pos < 0.0 {
        match boundary {
            Boundary::Zero => return Ok(0.0),
            Boundary::Extend => (0usize, 0.0),
        }
    } else {
        let lo = pos.floor();
        (lo as usize, pos - lo)
    };
    let (g, half) = lattice_weights(s, f.dx());
    let nx = f.nx() as isize;
    let pick = |i: isize| -> Option<usize> {
        if (0..nx).contains(&i) {
            Some(i as usize)
        } else {
            match boundary {
                Boundary::Zero => None,
                Boundary::Extend => Some(i.clamp(0, nx - 1) as usize),
            }
        }
    };
    let sample = |kk: usize| -> f64 {
        let mut sum = 0.0;
        if f.n() == 1 {
            for (m, w) in g.iter().enumerate() {
                if let Some(i) = pick(ix[0] as isize + m as isize - half as isize) {
                    sum += w * f.get(&[i], kk);
                }
            }
        } else {
            for (m1, w1) in g.iter().enumerate() {
                let Some(i1) = pick(ix[0] as isize + m1 as isize - half as isize) else { continue };
                for (m2, w2) in g.iter().enumerate() {
                    if let Some(i2) = pick(ix[1] as isize + m2 as isize - half as isize) {
                        sum += w1 * w2 * f.get(&[i1, i2], kk);
                    }
                }
            }
        }
        sum
    };
    let mut v = (1.0 - lam) * sample(lo);
    if lam > 0.0 && lo + 1 < f.nt() {
        v += lam * sample(lo + 1);
    }
    Ok(v)
}

/// A subordinated operator `int w(s) e^{-s(d/dt - Laplacian)} ds` prepared for
/// one grid geometry.
pub struct SubordinatedOperator {
    plan: TimePlan,
    mask: Option<Vec<bool>>,
    template: SpaceTimeGrid,
}

impl SubordinatedOperator {
    fn build<W: Fn(f64) -> f64 + Sync>(geom: &SpaceTimeGrid, weight: W, opts: &ApplyOptions) -> Result<Self> {
        let plan = TimePlan::new(geom, weight, opts.boundary, &opts.rule)?;
        let template = geom.with_values_unchecked(vec![0.0; geom.values().len()], None);
        let mask = opts.mask.then(|| mask_from(&plan.captured_mass(&template)));
        Ok(Self { plan, mask, template })
    }

    /// `P_tau^alpha` on the geometry of `geom`.
    pub fn poisson(geom: &SpaceTimeGrid, tau: f64, alpha: f64, opts: &ApplyOptions) -> Result<Self> {
        check_tau(tau)?;
        check_alpha(alpha)?;
        Self::build(geom, move |s| subordination_weight(tau, alpha, s), opts)
    }

    /// The whole `T_N^alpha` as one time weight (`K_N^alpha / W`).
    pub fn diff_kernel(geom: &SpaceTimeGrid, spec: &TransformSpec, opts: &ApplyOptions) -> Result<Self> {
        let spec = spec.clone();
        Self::build(geom, move |s| diff_time_weight(&spec, s), opts)
    }

    pub fn apply(&self, f: &SpaceTimeGrid) -> Result<SpaceTimeGrid> {
        self.template.check_same_geometry(f)?;
        Ok(f.with_values_unchecked(self.plan.apply(f), self.mask.clone()))
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }
}

/// `P_tau^alpha f` with the default options.
pub fn apply_fractional_poisson(f: &SpaceTimeGrid, tau: f64, alpha: f64) -> Result<SpaceTimeGrid> {
    apply_fractional_poisson_with(f, tau, alpha, &ApplyOptions::default())
}

pub fn apply_fractional_poisson_with(f: &SpaceTimeGrid, tau: f64, alpha: f64, opts: &ApplyOptions) -> Result<SpaceTimeGrid> {
    SubordinatedOperator::poisson(f, tau, alpha, opts)?.apply(f)
}

fn and_masks<'a>(masks: impl Iterator<Item = Option<&'a [bool]>>) -> Option<Vec<bool>> {
    let mut out: Option<Vec<bool>> = None;
    for m in masks {
        let m = m?;
        match &mut out {
            None => out = Some(m.to_vec()),
            Some(o) => o.iter_mut().zip(m).for_each(|(a, b)| *a &= *b),
        }
    }
    out
}

/// `P_{a_j}^alpha` for a contiguous range of scales, prepared once and applied
/// to any number of inputs.
pub struct ScaleBank {
    j_min: i64,
    ops: Vec<SubordinatedOperator>,
}

impl ScaleBank {
    pub fn new(geom: &SpaceTimeGrid, family: &TransformFamily, j_min: i64, j_max: i64, opts: &ApplyOptions) -> Result<Self> {
        if j_min > j_max || !family.a.contains(j_min) || !family.a.contains(j_max) {
            return Err(Error::Spec(format!("scales do not cover [{j_min}, {j_max}]")));
        }
        let ops = (j_min..=j_max)
            .map(|j| SubordinatedOperator::poisson(geom, family.a.a(j), family.alpha, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { j_min, ops })
    }

    pub fn apply_all(&self, f: &SpaceTimeGrid) -> Result<Vec<SpaceTimeGrid>> {
        self.ops.iter().map(|op| op.apply(f)).collect()
    }

    fn mask(&self, j_lo: i64, j_hi: i64) -> Option<Vec<bool>> {
        and_masks((j_lo..=j_hi).map(|j| self.ops[(j - self.j_min) as usize].mask()))
    }
}

/// `D_j = P_{a_{j+1}} f - P_{a_j} f` for `j` in `[j_lo, j_hi]`, from the bank outputs.
fn differences(p: &[SpaceTimeGrid]) -> Vec<Vec<f64>> {
    p.windows(2)
        .map(|w| w[1].values().iter().zip(w[0].values()).map(|(a, b)| a - b).collect())
        .collect()
}

/// `sum_{j=N1}^{N2} v_j D_j`, accumulated left to right from `0.0`.
fn window_sum(d: &[Vec<f64>], v: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (dj, vj) in d.iter().zip(v) {
        for (o, x) in out.iter_mut().zip(dj) {
            *o += vj * x;
        }
    }
    out
}

/// `T_N^alpha` prepared for one geometry.
pub struct DiffTransformOperator {
    spec: TransformSpec,
    bank: ScaleBank,
}

impl DiffTransformOperator {
    pub fn new(geom: &SpaceTimeGrid, spec: &TransformSpec, opts: &ApplyOptions) -> Result<Self> {
        let bank = ScaleBank::new(geom, &spec.family(), spec.n1(), spec.n2() + 1, opts)?;
        Ok(Self { spec: spec.clone(), bank })
    }

    /// Scale-sum path: `sum_j v_j (P_{a_{j+1}} f - P_{a_j} f)`.
    pub fn apply(&self, f: &SpaceTimeGrid) -> Result<SpaceTimeGrid> {
        let p = self.bank.apply_all(f)?;
        let d = differences(&p);
        let v: Vec<f64> = (self.spec.n1()..=self.spec.n2()).map(|j| self.spec.v().v(j)).collect();
        let out = window_sum(&d, &v, f.values().len());
        Ok(f.with_values_unchecked(out, self.bank.mask(self.spec.n1(), self.spec.n2() + 1)))
    }
}

/// `T_N^alpha f` by the scale-sum path with default options.
pub fn apply_diff_transform(f: &SpaceTimeGrid, spec: &TransformSpec) -> Result<SpaceTimeGrid> {
    apply_diff_transform_with(f, spec, &ApplyOptions::default())
}

pub fn apply_diff_transform_with(f: &SpaceTimeGrid, spec: &TransformSpec, opts: &ApplyOptions) -> Result<SpaceTimeGrid> {
    DiffTransformOperator::new(f, spec, opts)?.apply(f)
}

/// Kernel path for `T_N^alpha f` at one grid point: direct summation of
/// `K_N^alpha(x - y, s) dx^n / Z(s)^n` over the box and adaptive integration
/// in `s` over each time interval. Zero boundary only.
pub fn diff_transform_kernel_path(f: &SpaceTimeGrid, spec: &TransformSpec, ix: &[usize], k: usize, rule: &QuadratureRule) -> Result<f64> {
    if ix.len() != f.n() || ix.iter().any(|&i| i >= f.nx()) || k >= f.nt() {
        return Err(Error::Domain("grid point out of range".into()));
    }
    let n = f.n();
    let dx = f.dx();
    let dt = f.dt();
    let m = f.slice_len();
    let mut offsets = Vec::with_capacity(m);
    let mut here = vec![0.0; n];
    let mut there = vec![0.0; n];
    f.spatial_point(f.index(ix, 0), &mut here);
    for src in 0..m {
        f.spatial_point(src, &mut there);
        offsets.push(here.iter().zip(&there).map(|(a, b)| a - b).collect::<Vec<f64>>());
    }
    let mut total = 0.0;
    for l in 0..k {
        let lo = dt * l as f64;
        let newer = f.slice(k - l);
        let older = f.slice(k - l - 1);
        if newer.iter().chain(older).all(|v| *v == 0.0) {
            continue;
        }
        let est = integrate(
            |s: f64| {
                let u = (s - lo) / dt;
                let norm = (dx / lattice_mass(s, dx)).powi(n as i32);
                let mut sum = 0.0;
                for (src, y) in offsets.iter().enumerate() {
                    let fv = (1.0 - u) * newer[src] + u * older[src];
                    if fv == 0.0 {
                        continue;
                    }
                    let p = KernelPoint { y: y.clone(), s, tau: 1.0 };
                    sum += diff_transform_kernel(&p, spec) * fv;
                }
                sum * norm
            },
            lo,
            lo + dt,
            rule,
        )?;
        total += est.value;
    }
    Ok(total)
}

/// Truncated maximal transform `T_M^*` prepared for one geometry.
pub struct MaximalOperator {
    m: i64,
    v: Vec<f64>,
    bank: ScaleBank,
}

impl MaximalOperator {
    pub fn new(geom: &SpaceTimeGrid, family: &TransformFamily, m: i64, opts: &ApplyOptions) -> Result<Self> {
        if m < 1 {
            return Err(Error::Domain(format!("M must be positive, got {m}")));
        }
        family.check_truncation(m)?;
        let bank = ScaleBank::new(geom, family, -m, m + 1, opts)?;
        let v = (-m..=m).map(|j| family.v.v(j)).collect();
        Ok(Self { m, v, bank })
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    /// `sup_{-M <= N1 < N2 <= M} |T_N f|` pointwise, together with `T_{(-M, M)} f`.
    pub fn apply_with_full(&self, f: &SpaceTimeGrid) -> Result<(SpaceTimeGrid, SpaceTimeGrid)> {
        let p = self.bank.apply_all(f)?;
        let d = differences(&p);
        let len = f.values().len();
        let width = d.len();
        let (sup, full): (Vec<f64>, Vec<f64>) = (0..len)
            .into_par_iter()
            .map(|i| {
                let mut best = 0.0f64;
                let mut full = 0.0;
                for a in 0..width {
                    let mut run = 0.0;
                    for b in a..width {
                        run += self.v[b] * d[b][i];
                        if b > a {
                            best = best.max(run.abs());
                        }
                        if a == 0 && b == width - 1 {
                            full = run;
                        }
                    }
                }
                (best, full)
            })
            .unzip();
        let mask = self.bank.mask(-self.m, self.m + 1);
        Ok((f.with_values_unchecked(sup, mask.clone()), f.with_values_unchecked(full, mask)))
    }

    pub fn apply(&self, f: &SpaceTimeGrid) -> Result<SpaceTimeGrid> {
        Ok(self.apply_with_full(f)?.0)
    }
}

/// `T_M^* f` with default options.
pub fn maximal_transform(f: &SpaceTimeGrid, family: &TransformFamily, m: i64) -> Result<SpaceTimeGrid> {
    maximal_transform_with(f, family, m, &ApplyOptions::default())
}

pub fn maximal_transform_with(f: &SpaceTimeGrid, family: &TransformFamily, m: i64, opts: &ApplyOptions) -> Result<SpaceTimeGrid> {
    MaximalOperator::new(f, family, m, opts)?.apply(f)
}
