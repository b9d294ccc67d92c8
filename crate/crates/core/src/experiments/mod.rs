//! The divergence and growth constructions, their measurements, and the
//! experiment configuration used by the command-line front end.

mod bands;
mod config;
mod divergence;
mod growth;

pub use bands::{
    band_mass, base_choice_for, central_band_integral, choose_base_a, divergence_profile, shifted_band_integral, weight_total, BaseChoice,
};
pub use config::{auto_radii, inverse_conjugate, parse_key_values, ExperimentConfig, ExperimentKind, GridParams};
pub use divergence::{
    build_divergence_example, divergence_growth, divergence_probes, DivergenceExample, DivergenceReport, DivergenceRow,
};
pub use growth::{
    build_growth_example_2d, choose_growth_base, growth_experiment, growth_j0, staircase_band_integral, staircase_differences,
    staircase_profile, staircase_scale_value, window_sup, GrowthExample, GrowthPreset, GrowthReport, GrowthRow,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::transforms::SpaceTimeGrid;

/// A random trigonometric polynomial with `modes` terms and frequencies up to
/// `4 pi / X` in every variable (time scaled to the box), under the Gaussian
/// window `exp(-4 (|x|^2/X^2 + (t - t_mid)^2/T^2))`, `T` the window length.
pub fn band_limited_input(grid: &GridParams, seed: u64, modes: usize) -> Result<SpaceTimeGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t0, t1) = grid.t_range;
    let (x_ext, t_len, t_mid) = (grid.x_extent, t1 - t0, 0.5 * (t0 + t1));
    let terms: Vec<(Vec<f64>, f64, f64, f64)> = (0..modes)
        .map(|_| {
            let k: Vec<f64> = (0..grid.n).map(|_| rng.gen_range(-4.0..=4.0) * std::f64::consts::PI / x_ext).collect();
            let w = rng.gen_range(-4.0..=4.0) * std::f64::consts::PI / t_len;
            (k, w, rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-1.0..=1.0))
        })
        .collect();
    grid.sample(|x, t| {
        let r2: f64 = x.iter().map(|v| v * v).sum::<f64>() / (x_ext * x_ext) + (t - t_mid).powi(2) / (t_len * t_len);
        let wave: f64 = terms
            .iter()
            .map(|(k, w, phase, amp)| amp * (k.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w * t + phase).cos())
            .sum();
        (-4.0 * r2).exp() * wave
    })
}
