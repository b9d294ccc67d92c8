//! Space-time grids and every operator applied to them: heat, fractional
//! Poisson, differential transform, truncated maximal transform, and the
//! Hardy-Littlewood maximal operators.

mod conv;
pub mod grid;
pub mod lattice;
pub mod maximal;
pub mod ops;
pub mod spec;

pub use grid::{Boundary, SpaceTimeGrid};
pub use maximal::{backward_maximal, hl_maximal};
pub use ops::{
    apply_diff_transform, apply_diff_transform_with, apply_fractional_poisson, apply_fractional_poisson_with,
    apply_heat, apply_heat_with, diff_transform_kernel_path, heat_at, maximal_transform, maximal_transform_with,
    ApplyOptions, DiffTransformOperator, MaximalOperator, ScaleBank, SubordinatedOperator, MASK_THRESHOLD,
};
pub use spec::{TransformFamily, TransformSpec};
