//! PDE residuals of sampled fields.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{eval_coeffs, CoefficientSet};
use crate::error::Result;
use crate::field::{difference_derivatives, Field, FieldDerivs};
use crate::scattering::Branch;

use super::report::{Grid2D, Method, ResidualReport, Sampling};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest differencing step used by default.
pub const MAX_STENCIL_STEP: f64 = 1.0 / 512.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StencilStep {
    /// `min(grid spacing, 2⁻⁹)` in each direction.
    #[default]
    Capped,
    /// Exactly the grid spacing.
    Grid,
    /// A fixed step in both directions.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualOptions {
    pub step: StencilStep,
    /// Use a field's analytic derivatives when it provides them.
    pub analytic: bool,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            step: StencilStep::Capped,
            analytic: true,
        }
    }
}

impl ResidualOptions {
    pub fn differencing() -> Self {
        Self {
            analytic: false,
            ..Self::default()
        }
    }

    fn steps(&self, grid: &Grid2D) -> (f64, f64) {
        match self.step {
            StencilStep::Capped => (grid.dx().min(MAX_STENCIL_STEP), grid.dt().min(MAX_STENCIL_STEP)),
            StencilStep::Grid => (grid.dx(), grid.dt()),
            StencilStep::Fixed(h) => (h, h),
        }
    }
}

/// Evaluates `residual(x, t, derivatives)` at every grid node in parallel.
pub(crate) fn residual_on_grid<F>(
    field: &dyn Field,
    grid: &Grid2D,
    opts: &ResidualOptions,
    residual: F,
) -> Result<ResidualReport>
where
    F: Fn(f64, f64, &FieldDerivs) -> Result<f64> + Sync,
{
    grid.validate()?;
    let (hx, ht) = opts.steps(grid);
    let nx = grid.nx;
    let results = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, t) = (grid.x(k % nx), grid.t(k / nx));
            let (d, analytic) = match opts.analytic.then(|| field.derivatives(x, t)).flatten() {
                Some(d) => (d?, true),
                None => (difference_derivatives(field, x, t, hx, ht)?, false),
            };
            Ok(((x, t, residual(x, t, &d)?), analytic))
        })
        .collect::<Result<Vec<_>>>()?;
    let all_analytic = results.iter().all(|r| r.1);
    let samples: Vec<_> = results.into_iter().map(|r| r.0).collect();
    let method = if all_analytic {
        Method::AnalyticDerivatives
    } else {
        Method::Central6
    };
    Ok(ResidualReport::from_samples(
        &samples,
        grid.dx() * grid.dt(),
        method,
        Sampling::Grid(*grid),
    ))
}

/// `iχ_τ + h₀|χ|²χ − χ_ξξ`.
pub fn residual_autonomous(chi: &dyn Field, h0: f64, grid: &Grid2D, opts: &ResidualOptions) -> Result<ResidualReport> {
    residual_on_grid(chi, grid, opts, |_, _, d| {
        Ok((I * d.dt + h0 * d.value.norm_sqr() * d.value - d.dxx).norm())
    })
}

/// `iΨ_T + Ψ_XX ± 2|Ψ|²Ψ`, upper sign focusing.
pub fn residual_standard(psi: &dyn Field, branch: Branch, grid: &Grid2D, opts: &ResidualOptions) -> Result<ResidualReport> {
    let s = branch.sign();
    residual_on_grid(psi, grid, opts, |_, _, d| {
        Ok((I * d.dt + d.dxx + 2.0 * s * d.value.norm_sqr() * d.value).norm())
    })
}

/// `iψ_t + aψ_xx − bx²ψ + icxψ_x + idψ + fxψ − igψ_x − h(t)|ψ|²ψ`.
pub fn residual_nonautonomous(
    psi: &dyn Field,
    set: &CoefficientSet,
    h: &(dyn Fn(f64) -> Result<f64> + Sync),
    grid: &Grid2D,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    residual_on_grid(psi, grid, opts, |x, t, d| {
        let c = eval_coeffs(set, t)?;
        let r = I * d.dt + c.a * d.dxx - c.b * x * x * d.value + I * c.c * x * d.dx + I * c.d * d.value
            + c.f * x * d.value
            - I * c.g * d.dx
            - h(t)? * d.value.norm_sqr() * d.value;
        Ok(r.norm())
    })
}
