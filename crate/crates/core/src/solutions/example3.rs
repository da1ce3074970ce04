//! Soliton-like solution built on the nonlinear Airy profile for
//!
//! ```text
//! iχ_t + χ_xx − g₀β₀³x/L³ χ = h₀μ₀β₀²/L |χ|²χ,   L = 1 + 4α₀t.
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::field::Field;

use super::painleve::{painleve_profile, PainleveProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example3Params {
    pub alpha0: f64,
    pub beta0: f64,
    pub gamma0: f64,
    pub mu0: f64,
    pub g0: f64,
    pub h0: f64,
    pub k0: f64,
    pub y: f64,
}

impl Default for Example3Params {
    fn default() -> Self {
        Self {
            alpha0: 0.05,
            beta0: 1.0,
            gamma0: 0.2,
            mu0: 1.0,
            g0: 1.0,
            h0: 1.0,
            k0: 0.5,
            y: 0.5,
        }
    }
}

/// Which equation the field solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Example3Form {
    /// The linear-potential form `χ`.
    #[default]
    LinearPotential,
    /// `ψ = e^{−if(t)} χ`, the form with potential `g₀β₀²z/L²`.
    Gauged,
}

#[derive(Debug, Clone)]
pub struct Example3Solution {
    params: Example3Params,
    form: Example3Form,
    profile: PainleveProfile,
}

impl Example3Solution {
    /// `zeta_min` bounds the profile argument the field will be evaluated at.
    pub fn new(params: Example3Params, form: Example3Form, zeta_min: f64) -> Result<Self> {
        let p = &params;
        if ![p.alpha0, p.beta0, p.gamma0, p.mu0, p.g0, p.h0, p.k0, p.y].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("example 3 parameters must be finite".into()));
        }
        if !(p.h0 > 0.0) {
            return Err(Error::Domain {
                family: "example3".into(),
                violated: "h0 > 0".into(),
            });
        }
        if p.mu0 == 0.0 || p.beta0 == 0.0 {
            return Err(Error::InvalidParameter("mu0 and beta0 must be nonzero".into()));
        }
        let profile = painleve_profile(p.k0, zeta_min.min(-1.0))?;
        Ok(Self { params, form, profile })
    }

    pub fn params(&self) -> &Example3Params {
        &self.params
    }

    /// Coefficients of the linear-potential form.
    pub fn coefficients(&self) -> Result<CoefficientSet> {
        let p = &self.params;
        Ok(CoefficientSet::example3(p.alpha0, p.beta0, p.gamma0, p.g0)?.with_h0(p.h0))
    }

    /// `h(t) = h₀μ₀β₀²/L`.
    pub fn coupling(&self, t: f64) -> f64 {
        let p = &self.params;
        p.h0 * p.mu0 * p.beta0 * p.beta0 / (1.0 + 4.0 * p.alpha0 * t)
    }

    /// `z = (β₀x + 2Γy)/L` with `Γ = γ₀ − (β₀² − 4α₀γ₀)t`.
    pub fn z(&self, x: f64, t: f64) -> f64 {
        let p = &self.params;
        let l = 1.0 + 4.0 * p.alpha0 * t;
        (p.beta0 * x + 2.0 * self.big_gamma(t) * p.y) / l
    }

    fn big_gamma(&self, t: f64) -> f64 {
        let p = &self.params;
        p.gamma0 - (p.beta0 * p.beta0 - 4.0 * p.alpha0 * p.gamma0) * t
    }

    /// The gauge phase `f(t) = g₀β₀²ty(2γ₀ − (β₀² − 8α₀γ₀)t)/L²`, with `f(0) = 0`.
    pub fn gauge_phase(&self, t: f64) -> f64 {
        let p = &self.params;
        let l = 1.0 + 4.0 * p.alpha0 * t;
        p.g0 * p.beta0 * p.beta0 * t * p.y * (2.0 * p.gamma0 - (p.beta0 * p.beta0 - 8.0 * p.alpha0 * p.gamma0) * t)
            / (l * l)
    }
}

impl Field for Example3Solution {
    fn value(&self, x: f64, t: f64) -> Result<Complex64> {
        let p = &self.params;
        let l = 1.0 + 4.0 * p.alpha0 * t;
        if !(l > 0.0) {
            return Err(Error::Normalization {
                t,
                reason: format!("1 + 4 alpha0 t = {l} is not positive"),
            });
        }
        let gg = self.big_gamma(t);
        let mut s = (p.alpha0 * x * x + p.beta0 * x * p.y + gg * p.y * p.y) / l;
        if self.form == Example3Form::LinearPotential {
            s += self.gauge_phase(t);
        }
        let g3 = p.g0.cbrt();
        let (a, _) = self.profile.eval(g3 * self.z(x, t))?;
        let amp = g3 * (2.0 / p.h0).sqrt() * a / (p.mu0.abs() * l).sqrt();
        Ok(Complex64::from_polar(amp, s))
    }
}
