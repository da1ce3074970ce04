//! Numerical verification: PDE residuals, a split-step evolution oracle and
//! field comparison.

pub mod compare;
pub mod report;
pub mod residual;
pub mod simulate;

pub use compare::{compare_fields, FieldComparison};
pub use report::{EquationNorm, Grid2D, Method, Point, ResidualReport, Sampling, TimeSamples};
pub use residual::{
    residual_autonomous, residual_nonautonomous, residual_standard, ResidualOptions, StencilStep,
};
pub use simulate::{split_step_simulate, SplitStepOptions};
