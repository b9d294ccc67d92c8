use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge after {evals} evaluations \
         (partial value {partial:e}{partial_im:+e}i, error estimate {err_estimate:e})"
    )]
    NonConvergence {
        partial: f64,
        partial_im: f64,
        err_estimate: f64,
        evals: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("lacunarity violated at index {index}: ratio {ratio} < rho {rho}")]
    Lacunarity { index: i64, ratio: f64, rho: f64 },

    #[error("invalid sequence: {0}")]
    Sequence(String),

    #[error("invalid transform spec: {0}")]
    Spec(String),

    #[error("grid cannot resolve {0}")]
    Resolution(String),

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("fit refused: {0}")]
    FitRefused(String),

    #[error("bad format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
