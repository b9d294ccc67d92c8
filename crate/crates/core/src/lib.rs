//! Fractional Poisson operators for the parabolic operator `d/dt - Laplacian`,
//! differential transforms along lacunary scales, their maximal operators, and a
//! harness that checks the associated kernel, multiplier and growth estimates
//! numerically.

pub mod error;
pub mod experiments;
pub mod kernels;
pub mod quadrature;
pub mod sequences;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
