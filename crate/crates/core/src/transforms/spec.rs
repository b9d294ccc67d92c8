use crate::error::{Error, Result};
use crate::sequences::{LacunarySequence, MultiplierSequence};

/// Everything that identifies `T_N^alpha`: the order, the window `N = (N1, N2)`
/// and the two sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSpec {
    alpha: f64,
    n1: i64,
    n2: i64,
    a: LacunarySequence,
    v: MultiplierSequence,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

impl TransformSpec {
    pub fn new(alpha: f64, n1: i64, n2: i64, a: LacunarySequence, v: MultiplierSequence) -> Result<Self> {
        check_alpha(alpha)?;
        if n1 >= n2 {
            return Err(Error::Spec(format!("window needs N1 < N2, got ({n1}, {n2})")));
        }
        if !a.contains(n1) || !a.contains(n2 + 1) {
            return Err(Error::Spec(format!(
                "scales on [{}, {}] do not cover [{n1}, {}]",
                a.j_min(),
                a.j_max(),
                n2 + 1
            )));
        }
        if !v.contains(n1) || !v.contains(n2) {
            return Err(Error::Spec(format!(
                "weights on [{}, {}] do not cover [{n1}, {n2}]",
                v.j_min(),
                v.j_max()
            )));
        }
        Ok(Self { alpha, n1, n2, a, v })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n1(&self) -> i64 {
        self.n1
    }

    pub fn n2(&self) -> i64 {
        self.n2
    }

    pub fn a(&self) -> &LacunarySequence {
        &self.a
    }

    pub fn v(&self) -> &MultiplierSequence {
        &self.v
    }

    /// Same sequences, different window.
    pub fn with_window(&self, n1: i64, n2: i64) -> Result<Self> {
        Self::new(self.alpha, n1, n2, self.a.clone(), self.v.clone())
    }

    /// Same window and weights, scales multiplied by `lambda`.
    pub fn with_scaled_sequence(&self, lambda: f64) -> Result<Self> {
        Self::new(self.alpha, self.n1, self.n2, self.a.scaled(lambda)?, self.v.clone())
    }

    pub fn family(&self) -> TransformFamily {
        TransformFamily {
            alpha: self.alpha,
            a: self.a.clone(),
            v: self.v.clone(),
        }
    }
}

/// The sequences and order shared by all `T_N^alpha` entering a maximal operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformFamily {
    pub alpha: f64,
    pub a: LacunarySequence,
    pub v: MultiplierSequence,
}

impl TransformFamily {
    pub fn new(alpha: f64, a: LacunarySequence, v: MultiplierSequence) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, a, v })
    }

    pub fn spec(&self, n1: i64, n2: i64) -> Result<TransformSpec> {
        TransformSpec::new(self.alpha, n1, n2, self.a.clone(), self.v.clone())
    }

    /// Checks that windows inside `[-m, m]` are all admissible.
    pub fn check_truncation(&self, m: i64) -> Result<()> {
        if m < 1 {
            return Err(Error::Spec(format!("truncation M must be positive, got {m}")));
        }
        if !self.a.contains(-m) || !self.a.contains(m + 1) || !self.v.contains(-m) || !self.v.contains(m) {
            return Err(Error::Spec(format!("sequences do not cover [-{m}, {}]", m + 1)));
        }
        Ok(())
    }
}
