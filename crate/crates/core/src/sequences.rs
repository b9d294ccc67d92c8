//! Lacunary scale sequences, multiplier sequences and the renormalization
//! that brings every gap ratio into `[rho, rho^2]`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Relative slack used when comparing a computed ratio against `rho`.
const RATIO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    Geometric(f64),
    Custom(Vec<f64>),
}

/// Finite window `a_{j_min}, ..., a_{j_max}` of a rho-lacunary sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunarySequence {
    j_min: i64,
    values: Vec<f64>,
    rho: f64,
}

impl LacunarySequence {
    /// Builds a sequence from explicit values starting at index `j_min`.
    pub fn from_values(j_min: i64, values: Vec<f64>, rho: f64) -> Result<Self> {
        if !(rho > 1.0) || !rho.is_finite() {
            return Err(Error::Domain(format!("rho must be finite and > 1, got {rho}")));
        }
        if values.len() < 2 {
            return Err(Error::Sequence("a lacunary window needs at least two scales".into()));
        }
        for (i, &a) in values.iter().enumerate() {
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::Sequence(format!(
                    "scale at index {} is not a positive finite number: {a}",
                    j_min + i as i64
                )));
            }
        }
        for i in 0..values.len() - 1 {
            let ratio = values[i + 1] / values[i];
            if ratio < rho * (1.0 - RATIO_SLACK) {
                return Err(Error::Lacunarity {
                    index: j_min + i as i64,
                    ratio,
                    rho,
                });
            }
        }
        Ok(Self { j_min, values, rho })
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_min + self.values.len() as i64 - 1
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, j: i64) -> bool {
        j >= self.j_min && j <= self.j_max()
    }

    pub fn get(&self, j: i64) -> Option<f64> {
        if self.contains(j) {
            Some(self.values[(j - self.j_min) as usize])
        } else {
            None
        }
    }

    /// Scale `a_j`. Panics outside the window.
    pub fn a(&self, j: i64) -> f64 {
        self.get(j)
            .unwrap_or_else(|| panic!("scale index {j} outside [{}, {}]", self.j_min, self.j_max()))
    }

    /// Largest gap ratio `a_{j+1}/a_j` in the window.
    pub fn max_ratio(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }

    /// True when every gap ratio is at most `rho^2`.
    pub fn is_normalized(&self) -> bool {
        self.max_ratio() <= self.rho * self.rho * (1.0 + RATIO_SLACK)
    }

    /// Same sequence with every scale multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::from_values(
            self.j_min,
            self.values.iter().map(|a| a * lambda).collect(),
            self.rho,
        )
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_indexed_csv(w, "a_j", self.j_min, &self.values)
    }

    pub fn read_csv<R: Read>(r: R, rho: f64) -> Result<Self> {
        let (j_min, values) = read_indexed_csv(r)?;
        Self::from_values(j_min, values, rho)
    }
}

/// Builds `a_j` for `j in [j_min, j_max]`. A custom list is indexed from `j_min`
/// and must have exactly `j_max - j_min + 1` entries.
pub fn make_lacunary(kind: SequenceKind, rho: f64, j_min: i64, j_max: i64) -> Result<LacunarySequence> {
    if j_max <= j_min {
        return Err(Error::Sequence(format!("empty index range [{j_min}, {j_max}]")));
    }
    match kind {
        SequenceKind::Geometric(a) => {
            if a < rho {
                return Err(Error::Lacunarity { index: j_min, ratio: a, rho });
            }
            let values = (j_min..=j_max).map(|j| a.powi(j as i32)).collect();
            LacunarySequence::from_values(j_min, values, rho)
        }
        SequenceKind::Custom(list) => {
            let expected = (j_max - j_min + 1) as usize;
            if list.len() != expected {
                return Err(Error::Sequence(format!(
                    "custom list has {} entries, index range needs {expected}",
                    list.len()
                )));
            }
            LacunarySequence::from_values(j_min, list, rho)
        }
    }
}

/// Bounded weights `v_j` on a finite window.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSequence {
    j_min: i64,
    values: Vec<f64>,
    declared_p: Option<f64>,
}

impl MultiplierSequence {
    pub fn new(j_min: i64, values: Vec<f64>, declared_p: Option<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Sequence("multiplier window is empty".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Sequence(format!(
                "weight at index {} is not finite: {v}",
                j_min + i as i64
            )));
        }
        if let Some(p) = declared_p {
            if !(p >= 1.0) {
                return Err(Error::Domain(format!("declared p must lie in [1, inf], got {p}")));
            }
        }
        Ok(Self { j_min, values, declared_p })
    }

    pub fn from_fn(j_min: i64, j_max: i64, f: impl Fn(i64) -> f64) -> Result<Self> {
        Self::new(j_min, (j_min..=j_max).map(f).collect(), None)
    }

    pub fn constant(j_min: i64, j_max: i64, c: f64) -> Result<Self> {
        Self::from_fn(j_min, j_max, |_| c)
    }

    pub fn with_declared_p(mut self, p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("declared p must lie in [1, inf], got {p}")));
        }
        self.declared_p = Some(p);
        Ok(self)
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_min + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn declared_p(&self) -> Option<f64> {
        self.declared_p
    }

    pub fn contains(&self, j: i64) -> bool {
        j >= self.j_min && j <= self.j_max()
    }

    pub fn get(&self, j: i64) -> Option<f64> {
        if self.contains(j) {
            Some(self.values[(j - self.j_min) as usize])
        } else {
            None
        }
    }

    /// Weight `v_j`. Panics outside the window.
    pub fn v(&self, j: i64) -> f64 {
        self.get(j)
            .unwrap_or_else(|| panic!("weight index {j} outside [{}, {}]", self.j_min, self.j_max()))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `l^p` norm over the window; `p = inf` gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_indexed_csv(w, "v_j", self.j_min, &self.values)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (j_min, values) = read_indexed_csv(r)?;
        Self::new(j_min, values, None)
    }
}

fn write_indexed_csv<W: Write>(w: W, name: &str, j_min: i64, values: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["j", name])?;
    for (i, v) in values.iter().enumerate() {
        wtr.write_record([(j_min + i as i64).to_string(), format!("{v:e}")])?;
    }
    wtr.flush()?;
    Ok(())
}

fn read_indexed_csv<R: Read>(r: R) -> Result<(i64, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut j_min = None;
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Format(format!("expected 2 columns, found {}", rec.len())));
        }
        let j: i64 = rec[0]
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("bad index {:?}: {e}", &rec[0])))?;
        let v: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("bad value {:?}: {e}", &rec[1])))?;
        let start = *j_min.get_or_insert(j);
        if j != start + values.len() as i64 {
            return Err(Error::Format(format!("indices must be consecutive, found {j}")));
        }
        values.push(v);
    }
    let j_min = j_min.ok_or_else(|| Error::Format("no rows".into()))?;
    Ok((j_min, values))
}

/// Correspondence between original gaps `[a_j, a_{j+1}]` and the pieces that
/// replace them after renormalization.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    orig_j_min: i64,
    /// `starts[i]` is the new index of the first piece of original gap `orig_j_min + i`;
    /// the final entry is one past the last piece.
    starts: Vec<i64>,
}

impl IndexMap {
    /// New index of the first piece of original gap `j`.
    pub fn first_piece(&self, j: i64) -> i64 {
        self.starts[(j - self.orig_j_min) as usize]
    }

    /// New index of the last piece of original gap `j`.
    pub fn last_piece(&self, j: i64) -> i64 {
        self.starts[(j - self.orig_j_min) as usize + 1] - 1
    }

    /// Number of pieces original gap `j` was split into.
    pub fn pieces(&self, j: i64) -> usize {
        (self.last_piece(j) - self.first_piece(j) + 1) as usize
    }

    /// Maps a window `(N1, N2)` of the original pair to the window of the new pair
    /// that defines the same operator.
    pub fn map_window(&self, n1: i64, n2: i64) -> (i64, i64) {
        (self.first_piece(n1), self.last_piece(n2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPair {
    pub eta: LacunarySequence,
    pub theta: MultiplierSequence,
    pub index_map: IndexMap,
}

/// Splits every gap with ratio above `rho^2` into `k = ceil(log r / log rho^2)`
/// geometric pieces and repeats `v_j` across them, so each original difference
/// `P_{a_{j+1}} - P_{a_j}` is an exact telescoping sum of the new ones.
pub fn normalize_lacunary(a: &LacunarySequence, v: &MultiplierSequence) -> Result<NormalizedPair> {
    let rho = a.rho();
    if v.j_min() > a.j_min() || v.j_max() < a.j_max() - 1 {
        return Err(Error::Sequence(format!(
            "weights on [{}, {}] do not cover the gaps [{}, {}]",
            v.j_min(),
            v.j_max(),
            a.j_min(),
            a.j_max() - 1
        )));
    }
    let log_rho2 = 2.0 * rho.ln();
    let mut eta = vec![a.a(a.j_min())];
    let mut theta = Vec::new();
    let mut starts = vec![a.j_min()];
    for j in a.j_min()..a.j_max() {
        let lo = a.a(j);
        let hi = a.a(j + 1);
        let ratio = hi / lo;
        let k = if ratio <= rho * rho {
            1
        } else {
            (ratio.ln() / log_rho2).ceil() as usize
        };
        let q = ratio.powf(1.0 / k as f64);
        for i in 1..k {
            eta.push(lo * q.powi(i as i32));
        }
        eta.push(hi);
        theta.extend(std::iter::repeat(v.v(j)).take(k));
        starts.push(starts.last().unwrap() + k as i64);
    }
    Ok(NormalizedPair {
        eta: LacunarySequence::from_values(a.j_min(), eta, rho)?,
        theta: MultiplierSequence::new(a.j_min(), theta, v.declared_p())?,
        index_map: IndexMap {
            orig_j_min: a.j_min(),
            starts,
        },
    })
}

/// Log of `a^{2 alpha} e^{-a^2/(4s)} s^{-1-alpha}`.
pub(crate) fn log_scale_term(a: f64, alpha: f64, s: f64) -> f64 {
    2.0 * alpha * a.ln() - a * a / (4.0 * s) - (1.0 + alpha) * s.ln()
}

/// `sum_{j=m}^{M} v_j (a_{j+1}^{2a} e^{-a_{j+1}^2/4s} - a_j^{2a} e^{-a_j^2/4s}) s^{-1-a}`,
/// summed left to right.
pub fn telescope_sum(
    a: &LacunarySequence,
    v: &MultiplierSequence,
    m: i64,
    big_m: i64,
    alpha: f64,
    s: f64,
) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    if m > big_m || !a.contains(m) || !a.contains(big_m + 1) || !v.contains(m) || !v.contains(big_m) {
        return Err(Error::Sequence(format!(
            "summation range [{m}, {big_m}] is not covered by the sequences"
        )));
    }
    let terms: Vec<f64> = (m..=big_m + 1)
        .map(|j| log_scale_term(a.a(j), alpha, s).exp())
        .collect();
    let mut sum = 0.0;
    for j in m..=big_m {
        let i = (j - m) as usize;
        sum += v.v(j) * (terms[i + 1] - terms[i]);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_powers_of_two() {
        let a = make_lacunary(SequenceKind::Geometric(2.0), 2.0, -4, 4).unwrap();
        for j in -4..=4 {
            assert_eq!(a.a(j), 2f64.powi(j as i32));
        }
        assert!(a.is_normalized());
    }

    #[test]
    fn custom_list_reports_first_bad_index() {
        let err = make_lacunary(SequenceKind::Custom(vec![1.0, 1.5, 3.0]), 2.0, 0, 2).unwrap_err();
        match err {
            Error::Lacunarity { index, ratio, .. } => {
                assert_eq!(index, 0);
                assert!((ratio - 1.5).abs() < 1e-15);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn geometric_base_below_rho_is_rejected() {
        assert!(make_lacunary(SequenceKind::Geometric(1.5), 2.0, 0, 3).is_err());
    }

    #[test]
    fn already_normalized_pair_is_identity() {
        let a = make_lacunary(SequenceKind::Geometric(2.0), 2.0, -3, 3).unwrap();
        let v = MultiplierSequence::from_fn(-3, 2, |j| j as f64).unwrap();
        let n = normalize_lacunary(&a, &v).unwrap();
        assert_eq!(n.eta, a);
        assert_eq!(n.theta.values(), v.values());
        assert_eq!(n.index_map.map_window(-2, 1), (-2, 1));
    }

    #[test]
    fn base_eight_splits_into_two_pieces() {
        let a = make_lacunary(SequenceKind::Geometric(8.0), 2.0, 0, 3).unwrap();
        let v = MultiplierSequence::new(0, vec![1.0, -2.0, 0.5], None).unwrap();
        let n = normalize_lacunary(&a, &v).unwrap();
        assert!(n.eta.is_normalized());
        assert_eq!(n.eta.values().len(), 7);
        assert_eq!(n.theta.values(), &[1.0, 1.0, -2.0, -2.0, 0.5, 0.5]);
        assert_eq!(n.index_map.map_window(0, 1), (0, 3));
        assert_eq!(n.index_map.pieces(2), 2);
        for j in 0..=2 {
            assert_eq!(n.eta.a(n.index_map.first_piece(j)), a.a(j));
        }
        assert_eq!(n.eta.a(n.eta.j_max()), a.a(3));
    }

    #[test]
    fn telescope_with_unit_weights_collapses() {
        let a = make_lacunary(SequenceKind::Geometric(2.0), 2.0, -3, 6).unwrap();
        let v = MultiplierSequence::constant(-3, 5, 1.0).unwrap();
        let s = 0.7;
        let alpha = 0.3;
        let got = telescope_sum(&a, &v, -2, 4, alpha, s).unwrap();
        let want = log_scale_term(a.a(5), alpha, s).exp() - log_scale_term(a.a(-2), alpha, s).exp();
        assert!((got - want).abs() < 1e-14 * want.abs().max(1.0));
    }

    #[test]
    fn csv_round_trip() {
        let a = make_lacunary(SequenceKind::Geometric(3.0), 2.0, -2, 2).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let back = LacunarySequence::read_csv(buf.as_slice(), 2.0).unwrap();
        assert_eq!(back.j_min(), -2);
        for (x, y) in back.values().iter().zip(a.values()) {
            assert!((x - y).abs() <= 1e-15 * y);
        }
    }
}
