//! Strang split-step Fourier integration of the nonautonomous equation with
//! `c ≡ g ≡ 0`, used as an evolution oracle independent of the transformation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::coeffs::{eval_coeffs, CoefficientSet};
use crate::error::{Error, Result};
use crate::field::{Field, FieldSamples};

use super::report::Grid2D;

/// Largest initial magnitude allowed at the grid ends.
pub const EDGE_TOLERANCE: f64 = 1e-10;
/// Largest fraction of the norm allowed in the upper third of the spectrum.
pub const ALIAS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStepOptions {
    pub dt: f64,
}

/// Evolves `initial` (sampled at `grid.t0`) and returns samples at every grid time.
///
/// The grid is periodic with period `nx·Δx`. Each step is
/// potential(dt/2) · kinetic(dt) · potential(dt/2), with coefficients taken at
/// the midpoint of each sub-step. The potential sub-step is solved exactly,
/// including the `e^{−d s}` amplitude change.
pub fn split_step_simulate(
    set: &CoefficientSet,
    h: &dyn Fn(f64) -> Result<f64>,
    initial: &dyn Field,
    grid: &Grid2D,
    opts: &SplitStepOptions,
) -> Result<FieldSamples> {
    grid.validate()?;
    if !set.c.is_zero() || !set.g.is_zero() {
        return Err(Error::Unsupported("split-step simulation requires c = g = 0".into()));
    }
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {}", opts.dt)));
    }
    let xs = grid.xs();
    let ts = grid.ts();
    let n = xs.len();
    let dx = grid.dx();
    let mut psi = xs
        .iter()
        .map(|&x| initial.value(x, ts[0]))
        .collect::<Result<Vec<_>>>()?;
    let edge = psi[0].norm().max(psi[n - 1].norm());
    if edge > EDGE_TOLERANCE {
        return Err(Error::Resolution(format!(
            "initial data is {edge:.3e} at the grid ends; periodic wrap-around would pollute the result"
        )));
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let k: Vec<f64> = (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            2.0 * PI * m / (n as f64 * dx)
        })
        .collect();
    let upper: Vec<bool> = (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j } else { n - j };
            3 * m > n
        })
        .collect();
    let check_alias = |spec: &[Complex64], t: f64| -> Result<()> {
        let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
        let high: f64 = spec.iter().zip(&upper).filter(|(_, u)| **u).map(|(v, _)| v.norm_sqr()).sum();
        if total > 0.0 && high > ALIAS_TOLERANCE * total {
            return Err(Error::Resolution(format!(
                "upper third of the spectrum holds {:.3e} of the norm at t = {t}",
                high / total
            )));
        }
        Ok(())
    };

    let potential = |psi: &mut [Complex64], t_mid: f64, s: f64| -> Result<()> {
        let c = eval_coeffs(set, t_mid)?;
        let hv = h(t_mid)?;
        let decay = (-c.d * s).exp();
        // ∫₀ˢ e^{−2dσ} dσ
        let w = if (c.d * s).abs() < 1e-8 {
            s * (1.0 - c.d * s)
        } else {
            (1.0 - (-2.0 * c.d * s).exp()) / (2.0 * c.d)
        };
        for (v, &x) in psi.iter_mut().zip(&xs) {
            let phase = -(c.b * x * x - c.f * x) * s - hv * v.norm_sqr() * w;
            *v *= Complex64::from_polar(decay, phase);
        }
        Ok(())
    };

    let mut values = Vec::with_capacity(n * ts.len());
    values.extend_from_slice(&psi);
    let mut spec = psi.clone();
    fwd.process(&mut spec);
    check_alias(&spec, ts[0])?;

    for w in ts.windows(2) {
        let (t_a, t_b) = (w[0], w[1]);
        let steps = ((t_b - t_a) / opts.dt - 1e-9).ceil().max(1.0) as usize;
        let step = (t_b - t_a) / steps as f64;
        for i in 0..steps {
            let t = t_a + i as f64 * step;
            potential(&mut psi, t + 0.25 * step, 0.5 * step)?;
            fwd.process(&mut psi);
            let a = eval_coeffs(set, t + 0.5 * step)?.a;
            for (v, kj) in psi.iter_mut().zip(&k) {
                *v *= Complex64::from_polar(1.0 / n as f64, -a * kj * kj * step);
            }
            inv.process(&mut psi);
            potential(&mut psi, t + 0.75 * step, 0.5 * step)?;
        }
        if let Some(v) = psi.iter().find(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure {
                t_last: t_b,
                reason: format!("split-step field became non-finite ({v})"),
            });
        }
        spec.copy_from_slice(&psi);
        fwd.process(&mut spec);
        check_alias(&spec, t_b)?;
        values.extend_from_slice(&psi);
    }
    Ok(FieldSamples { xs, ts, values })
}
