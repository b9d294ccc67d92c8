use super::{BoundReport, Sample};
use crate::error::{Error, Result};
use crate::transforms::{backward_maximal, hl_maximal, ApplyOptions, MaximalOperator, SpaceTimeGrid, TransformFamily};

/// Both sides of the Cotlar inequality on the whole grid.
#[derive(Debug, Clone)]
pub struct CotlarParts {
    /// `T_M^* f`.
    pub lhs: SpaceTimeGrid,
    /// `M^-(M(T_{(-M,M)} f)) + M_q^-(M_q f)`.
    pub rhs: SpaceTimeGrid,
}

impl CotlarParts {
    pub fn compute(f: &SpaceTimeGrid, family: &TransformFamily, m: i64, q: f64, opts: &ApplyOptions) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::Domain(format!("q must lie in (1, inf), got {q}")));
        }
        let (lhs, full) = MaximalOperator::new(f, family, m, opts)?.apply_with_full(f)?;
        let first = backward_maximal(&hl_maximal(&full, 1.0)?, 1.0)?;
        let second = backward_maximal(&hl_maximal(f, q)?, q)?;
        let rhs: Vec<f64> = first.values().iter().zip(second.values()).map(|(a, b)| a + b).collect();
        let rhs = f.with_values(rhs)?;
        Ok(Self { lhs, rhs })
    }
}

/// Indices of the central half of the box in every coordinate, time included.
fn central(f: &SpaceTimeGrid) -> Vec<usize> {
    let (lo_x, hi_x) = (f.nx() / 4, f.nx() - f.nx() / 4);
    let (lo_t, hi_t) = (f.nt() / 4, f.nt() - f.nt() / 4);
    let mut out = Vec::new();
    for k in lo_t..hi_t {
        if f.n() == 1 {
            for i in lo_x..hi_x {
                out.push(f.index(&[i], k));
            }
        } else {
            for i in lo_x..hi_x {
                for j in lo_x..hi_x {
                    out.push(f.index(&[i, j], k));
                }
            }
        }
    }
    out
}

/// Sampled sup of `T_M^* f / rhs` over the central subgrid; points where both
/// sides vanish count as ratio 0.
///
/// Masking is off: with zero extension every operator here is exact for the
/// sampled function, so no output point is contaminated by the box edge.
pub fn check_cotlar(f: &SpaceTimeGrid, family: &TransformFamily, m: i64, q: f64) -> Result<BoundReport> {
    check_cotlar_with(f, family, m, q, &ApplyOptions::default().without_mask())
}

pub fn check_cotlar_with(
    f: &SpaceTimeGrid,
    family: &TransformFamily,
    m: i64,
    q: f64,
    opts: &ApplyOptions,
) -> Result<BoundReport> {
    let parts = CotlarParts::compute(f, family, m, q, opts)?;
    let mut x = vec![0.0; f.n()];
    let m_len = f.slice_len();
    let rows: Vec<Sample> = central(f)
        .into_iter()
        .map(|idx| {
            let (k, s) = (idx / m_len, idx % m_len);
            f.spatial_point(s, &mut x);
            let mut point = x.clone();
            point.push(f.t(k));
            let l = parts.lhs.values()[idx];
            let r = parts.rhs.values()[idx];
            let ratio = if l == 0.0 { 0.0 } else { l / r };
            Sample { point, value: l, ratio, skipped: false }
        })
        .collect();
    Ok(BoundReport::from_samples("T_M^* f <= C (M^-(M(T_(-M,M) f)) + M_q^-(M_q f))", rows))
}
