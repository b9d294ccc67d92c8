use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::transforms::SpaceTimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Divergence,
    GrowthUpper,
    GrowthLowerLp,
    GrowthLowerLinf,
    Cotlar,
    Multiplier,
    KernelDecay,
    Convergence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::Divergence,
        Self::GrowthUpper,
        Self::GrowthLowerLp,
        Self::GrowthLowerLinf,
        Self::Cotlar,
        Self::Multiplier,
        Self::KernelDecay,
        Self::Convergence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Divergence => "divergence",
            Self::GrowthUpper => "growth-upper",
            Self::GrowthLowerLp => "growth-lower-lp",
            Self::GrowthLowerLinf => "growth-lower-linf",
            Self::Cotlar => "cotlar",
            Self::Multiplier => "multiplier",
            Self::KernelDecay => "kernel-decay",
            Self::Convergence => "convergence",
        }
    }

    pub fn is_growth(&self) -> bool {
        matches!(self, Self::GrowthUpper | Self::GrowthLowerLp | Self::GrowthLowerLinf)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown experiment '{s}'")))
    }
}

/// Box, resolution and time window of a sampled grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub n: usize,
    pub x_extent: f64,
    pub nx: usize,
    pub t_range: (f64, f64),
    pub nt: usize,
}

impl GridParams {
    pub fn sample(&self, f: impl Fn(&[f64], f64) -> f64) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::from_fn(self.n, self.x_extent, self.nx, self.t_range, self.nt, f)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_extent / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_range.1 - self.t_range.0) / (self.nt - 1) as f64
    }

    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, nt: 2 * self.nt - 1, ..*self }
    }
}

/// `1/p'` with `p' = p/(p-1)`, `1' = inf` and `inf' = 1`.
pub fn inverse_conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        1.0 - 1.0 / p
    }
}

/// Parameters of one experiment run. Unset optional fields take per-experiment defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub alpha: f64,
    pub a_base: Option<f64>,
    pub rho: f64,
    pub p: f64,
    pub epsilon: f64,
    pub big_m: i64,
    pub grid: GridParams,
    /// Empty selects [`auto_radii`] for the chosen base.
    pub radii: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Defaults for everything except `experiment` and `alpha`; the grid, `M`
    /// and `p` defaults depend on the experiment.
    pub fn new(experiment: ExperimentKind, alpha: f64) -> Self {
        use ExperimentKind::*;
        let grid = match experiment {
            Divergence => GridParams { n: 1, x_extent: 1.0, nx: 4, t_range: (-25.0, 1.0), nt: 16385 },
            GrowthUpper | GrowthLowerLp | GrowthLowerLinf => {
                GridParams { n: 1, x_extent: 1.5, nx: 33, t_range: (-1.5, 1.5), nt: 33 }
            }
            _ => GridParams { n: 1, x_extent: 4.0, nx: 64, t_range: (-4.0, 4.0), nt: 64 },
        };
        let big_m = match experiment {
            Divergence => 12,
            Cotlar => 3,
            Multiplier => 5,
            Convergence => 16,
            GrowthUpper | GrowthLowerLp | GrowthLowerLinf => 80,
            _ => 8,
        };
        Self {
            experiment,
            alpha,
            a_base: None,
            rho: 2.0,
            p: if experiment == GrowthUpper { 1.0 } else { 2.0 },
            epsilon: 0.5,
            big_m,
            grid,
            radii: Vec::new(),
            seed: 1,
            out: PathBuf::from("report"),
        }
    }

    /// Sets one field from its textual form. Keys match the command-line flags
    /// without dashes (`a-base`, `M`, `T0`, ...); underscores are accepted too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Format(format!("bad value '{value}' for {what}"));
        let num = |what: &str| value.trim().parse::<f64>().map_err(|_| bad(what));
        let int = |what: &str| value.trim().parse::<usize>().map_err(|_| bad(what));
        match key.trim().replace('_', "-").as_str() {
            "experiment" => self.experiment = value.trim().parse()?,
            "alpha" => self.alpha = num("alpha")?,
            "a-base" => self.a_base = Some(num("a-base")?),
            "rho" => self.rho = num("rho")?,
            "p" => self.p = num("p")?,
            "epsilon" => self.epsilon = num("epsilon")?,
            "M" | "m" => self.big_m = value.trim().parse::<i64>().map_err(|_| bad("M"))?,
            "n" => self.grid.n = int("n")?,
            "X" | "x" => self.grid.x_extent = num("X")?,
            "nx" => self.grid.nx = int("nx")?,
            "nt" => self.grid.nt = int("nt")?,
            "T0" | "t0" => self.grid.t_range.0 = num("T0")?,
            "T1" | "t1" => self.grid.t_range.1 = num("T1")?,
            "radii" => self.radii = parse_list(value)?,
            "seed" => self.seed = value.trim().parse().map_err(|_| bad("seed"))?,
            "out" => self.out = PathBuf::from(value.trim()),
            other => return Err(Error::Format(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let dom = |m: String| Err(Error::Domain(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return dom(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let Some(a) = self.a_base {
            if !(a > 1.0 && a <= 100.0) {
                return dom(format!("a-base must lie in (1, 100], got {a}"));
            }
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return dom(format!("rho must exceed 1, got {}", self.rho));
        }
        if self.big_m < 1 {
            return dom(format!("M must be positive, got {}", self.big_m));
        }
        let g = &self.grid;
        if !(g.n == 1 || g.n == 2) || g.nx < 2 || g.nt < 2 || !(g.x_extent > 0.0) || !(g.t_range.1 > g.t_range.0) {
            return dom(format!("bad grid parameters {g:?}"));
        }
        match self.experiment {
            ExperimentKind::GrowthUpper if !(self.p >= 1.0) => return dom(format!("p must be at least 1, got {}", self.p)),
            ExperimentKind::GrowthLowerLp => {
                if !(self.p > 1.0 && self.p.is_finite()) {
                    return dom(format!("p must lie in (1, inf), got {}", self.p));
                }
                if !(self.epsilon > 0.0 && self.epsilon < self.p - 1.0) {
                    return dom(format!("epsilon must lie in (0, p - 1), got {}", self.epsilon));
                }
            }
            _ => {}
        }
        if self.experiment.is_growth() {
            if let Some(r) = self.radii.iter().find(|r| !(**r > 0.0 && 2.0 * **r < 1.0)) {
                return dom(format!("growth radii must satisfy 0 < 2r < 1, got {r}"));
            }
            if self.radii.windows(2).any(|w| w[1] >= w[0]) {
                return dom("radii must be strictly decreasing".into());
            }
        }
        Ok(())
    }
}

/// Twelve radii log-spaced from `1e-10` down to `max(a^{-2(M-3)}, 1e-250)`, deep
/// enough that the admissible scale count dominates its constant offset.
pub fn auto_radii(a: f64, big_m: i64) -> Vec<f64> {
    let lo = (-2.0 * (big_m - 3) as f64 * a.ln()).max(-250.0 * std::f64::consts::LN_10);
    let hi = -10.0 * std::f64::consts::LN_10;
    (0..12).map(|k| (hi + (lo - hi) * k as f64 / 11.0).exp()).collect()
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad list entry '{s}'"))))
        .collect()
}

/// `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key = value, got '{line}'", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}
