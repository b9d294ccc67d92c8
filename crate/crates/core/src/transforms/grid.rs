use std::io::{Read, Write};

use crate::error::{Error, Result};

/// How a function continues outside the sampled box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Zero outside the box in space and before `T0` in time.
    #[default]
    Zero,
    /// Edge values continue in space; the first slice continues into the past.
    Extend,
}

/// Samples of a real function on `[-X, X]^n x [T0, T1]`.
///
/// Values are time-major: slice `k` occupies `values[k * nx^n .. (k + 1) * nx^n]`,
/// and inside a slice the last spatial axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    n: usize,
    x_extent: f64,
    nx: usize,
    t0: f64,
    t1: f64,
    nt: usize,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

const MAGIC: &[u8; 4] = b"DTLG";
const VERSION: u32 = 1;

impl SpaceTimeGrid {
    pub fn new(n: usize, x_extent: f64, nx: usize, t_range: (f64, f64), nt: usize, values: Vec<f64>) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {n}")));
        }
        if nx < 4 || nt < 4 {
            return Err(Error::InvalidGrid(format!("need nx, nt >= 4, got nx={nx}, nt={nt}")));
        }
        if !(x_extent > 0.0 && x_extent.is_finite()) {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {x_extent}")));
        }
        let (t0, t1) = t_range;
        if !(t1 > t0 && t0.is_finite() && t1.is_finite()) {
            return Err(Error::InvalidGrid(format!("time range must satisfy T0 < T1, got [{t0}, {t1}]")));
        }
        let len = nx.pow(n as u32) * nt;
        if values.len() != len {
            return Err(Error::InvalidGrid(format!("expected {len} values, got {}", values.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("value {i} is not finite")));
        }
        Ok(Self { n, x_extent, nx, t0, t1, nt, values, mask: None })
    }

    /// Samples `f(x, t)` at every grid point.
    pub fn from_fn(n: usize, x_extent: f64, nx: usize, t_range: (f64, f64), nt: usize, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(n, x_extent, nx, t_range, nt)?;
        let mut x = vec![0.0; n];
        let m = g.slice_len();
        for k in 0..nt {
            let t = g.t(k);
            for s in 0..m {
                g.spatial_point(s, &mut x);
                g.values[k * m + s] = f(&x, t);
            }
        }
        if let Some(i) = g.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("value {i} is not finite")));
        }
        Ok(g)
    }

    pub fn zeros(n: usize, x_extent: f64, nx: usize, t_range: (f64, f64), nt: usize) -> Result<Self> {
        let len = if n == 1 || n == 2 { nx.pow(n as u32) * nt } else { 0 };
        Self::new(n, x_extent, nx, t_range, nt, vec![0.0; len])
    }

    /// A grid on the same geometry with new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.n, self.x_extent, self.nx, (self.t0, self.t1), self.nt, values)
    }

    pub(crate) fn with_values_unchecked(&self, values: Vec<f64>, mask: Option<Vec<bool>>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self { values, mask, ..self.geometry_clone() }
    }

    fn geometry_clone(&self) -> Self {
        Self {
            n: self.n,
            x_extent: self.x_extent,
            nx: self.nx,
            t0: self.t0,
            t1: self.t1,
            nt: self.nt,
            values: Vec::new(),
            mask: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_extent(&self) -> f64 {
        self.x_extent
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_extent / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / (self.nt - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.x_extent + self.dx() * i as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t0 + self.dt() * k as f64
    }

    /// Points per time slice, `nx^n`.
    pub fn slice_len(&self) -> usize {
        self.nx.pow(self.n as u32)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let m = self.slice_len();
        &self.values[k * m..(k + 1) * m]
    }

    /// Flat index of spatial multi-index `ix` (length `n`) at slice `k`.
    pub fn index(&self, ix: &[usize], k: usize) -> usize {
        let s = ix.iter().fold(0, |acc, &i| acc * self.nx + i);
        k * self.slice_len() + s
    }

    pub fn get(&self, ix: &[usize], k: usize) -> f64 {
        self.values[self.index(ix, k)]
    }

    /// Coordinates of spatial point `s` (flat index within a slice).
    pub fn spatial_point(&self, s: usize, out: &mut [f64]) {
        let mut rem = s;
        for d in (0..self.n).rev() {
            out[d] = self.x(rem % self.nx);
            rem /= self.nx;
        }
    }

    /// Validity mask: `true` where at least 99% of the kernel mass fell inside the box.
    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn is_valid(&self, idx: usize) -> bool {
        self.mask.as_ref().map_or(true, |m| m[idx])
    }

    pub fn with_mask(mut self, mask: Option<Vec<bool>>) -> Result<Self> {
        if let Some(m) = &mask {
            if m.len() != self.values.len() {
                return Err(Error::InvalidGrid(format!("mask has {} entries, grid has {}", m.len(), self.values.len())));
            }
        }
        self.mask = mask;
        Ok(self)
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.n == other.n
            && self.nx == other.nx
            && self.nt == other.nt
            && self.x_extent == other.x_extent
            && self.t0 == other.t0
            && self.t1 == other.t1
    }

    pub(crate) fn check_same_geometry(&self, other: &Self) -> Result<()> {
        if self.same_geometry(other) {
            Ok(())
        } else {
            Err(Error::InvalidGrid("grids have different geometry".into()))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes the binary `DTLG` format (version 1, little-endian).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.nx as u32).to_le_bytes())?;
        w.write_all(&(self.nt as u32).to_le_bytes())?;
        for v in [self.x_extent, self.t0, self.t1] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("missing DTLG magic".into()));
        }
        let mut u = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut u)?;
            Ok(u32::from_le_bytes(u))
        };
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported DTLG version {version}")));
        }
        let n = read_u32(&mut r)? as usize;
        let nx = read_u32(&mut r)? as usize;
        let nt = read_u32(&mut r)? as usize;
        let mut f = [0u8; 8];
        let mut read_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut f)?;
            Ok(f64::from_le_bytes(f))
        };
        let x_extent = read_f64(&mut r)?;
        let t0 = read_f64(&mut r)?;
        let t1 = read_f64(&mut r)?;
        if n != 1 && n != 2 {
            return Err(Error::Format(format!("bad dimension {n}")));
        }
        let len = nx
            .checked_pow(n as u32)
            .and_then(|m| m.checked_mul(nt))
            .ok_or_else(|| Error::Format("grid size overflows".into()))?;
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(read_f64(&mut r)?);
        }
        Self::new(n, x_extent, nx, (t0, t1), nt, values)
    }

    /// CSV with header `x,t,value` (`x1,x2,t,value` in two dimensions).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.n == 1 {
            wr.write_record(["x", "t", "value"])?;
        } else {
            wr.write_record(["x1", "x2", "t", "value"])?;
        }
        let mut x = vec![0.0; self.n];
        let mut row: Vec<String> = Vec::with_capacity(self.n + 2);
        for k in 0..self.nt {
            for s in 0..self.slice_len() {
                self.spatial_point(s, &mut x);
                row.clear();
                row.extend(x.iter().map(|v| v.to_string()));
                row.push(self.t(k).to_string());
                row.push(self.values[k * self.slice_len() + s].to_string());
                wr.write_record(&row)?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}
