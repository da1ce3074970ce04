//! The nonlinear Airy function: the solution of `u'' = ζu + 2u³` with
//! `u ~ k₀Ai(ζ)` as `ζ → +∞`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::find_root;
use crate::numerics::ode::{dopri5, DenseSolution, OdeOptions};
use crate::numerics::special::{airy, ln_gamma};

/// Where the backward integration starts from Airy data.
pub const ZETA_START: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct PainleveProfile {
    k0: f64,
    zeta_end: f64,
    sol: DenseSolution,
}

/// Least-squares fit of `r|ζ|^{−1/4} sin(s(ζ) − θ₀)` to the oscillatory tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PainleveFit {
    pub k0: f64,
    pub window: (f64, f64),
    pub extrema: usize,
    pub r_hat: f64,
    /// `√(−ln(1 − k₀²)/π)`.
    pub r_expected: f64,
    pub theta_hat: f64,
    pub theta_expected: f64,
}

impl PainleveFit {
    pub fn r_relative_error(&self) -> f64 {
        (self.r_hat / self.r_expected - 1.0).abs()
    }

    pub fn theta_relative_error(&self) -> f64 {
        (self.theta_hat - self.theta_expected).abs() / self.theta_expected.abs()
    }
}

/// `r² = −π⁻¹ ln(1 − k₀²)`.
pub fn expected_r(k0: f64) -> f64 {
    (-(1.0 - k0 * k0).ln() / PI).sqrt()
}

/// `θ₀ = (3/2) r² ln 2 + arg Γ(1 − ir²/2) + (π/4)(1 − 2 sign k₀)`.
pub fn expected_theta(k0: f64) -> f64 {
    let r2 = expected_r(k0).powi(2);
    1.5 * r2 * 2f64.ln() + ln_gamma(Complex64::new(1.0, -0.5 * r2)).im + FRAC_PI_4 * (1.0 - 2.0 * k0.signum())
}

/// Integrates from `ζ = 8` down to `zeta_end`.
pub fn painleve_profile(k0: f64, zeta_end: f64) -> Result<PainleveProfile> {
    if !(k0 != 0.0 && k0.abs() < 1.0) {
        return Err(Error::Domain {
            family: "painleve2".into(),
            violated: "0 < |k0| < 1".into(),
        });
    }
    if !(zeta_end < ZETA_START) || !zeta_end.is_finite() {
        return Err(Error::InvalidParameter(format!("zeta_end must be below {ZETA_START}, got {zeta_end}")));
    }
    let sol = integrate_from_airy(k0, zeta_end)?;
    Ok(PainleveProfile { k0, zeta_end, sol })
}

fn integrate_from_airy(k0: f64, zeta_end: f64) -> Result<DenseSolution> {
    let (ai, aip) = airy(ZETA_START);
    let y0 = [k0 * ai, k0 * aip];
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14 * y0[0].abs(),
        h_max: 0.05,
        max_steps: 2_000_000,
        max_abs: 1e3,
    };
    dopri5(
        |z, u, du| {
            du[0] = u[1];
            du[1] = z * u[0] + 2.0 * u[0].powi(3);
        },
        ZETA_START,
        &y0,
        zeta_end,
        &opts,
    )
    .map_err(|e| match e {
        Error::IntegrationFailure { t_last, .. } => Error::Divergence { zeta: t_last },
        other => other,
    })
}

impl PainleveProfile {
    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn span(&self) -> (f64, f64) {
        (self.zeta_end, f64::INFINITY)
    }

    /// `(u, u')`; beyond the starting point the Airy data is returned.
    pub fn eval(&self, zeta: f64) -> Result<(f64, f64)> {
        if zeta >= ZETA_START {
            let (ai, aip) = airy(zeta);
            return Ok((self.k0 * ai, self.k0 * aip));
        }
        if zeta < self.zeta_end || zeta.is_nan() {
            return Err(Error::OutOfDomain {
                t: zeta,
                lo: self.zeta_end,
                hi: f64::INFINITY,
            });
        }
        let v = self.sol.eval(zeta)?;
        Ok((v[0], v[1]))
    }

    pub fn sample(&self, zetas: &[f64]) -> Result<Vec<f64>> {
        zetas.iter().map(|&z| self.eval(z).map(|v| v.0)).collect()
    }

    /// Fits the tail on `[lo, hi]` from the extrema of `u`.
    pub fn fit(&self, lo: f64, hi: f64) -> Result<PainleveFit> {
        if !(lo < hi && hi < 0.0) {
            return Err(Error::InvalidParameter(format!("fit window [{lo}, {hi}] must lie in ζ < 0")));
        }
        let step = 0.01;
        let n = ((hi - lo) / step).ceil() as usize;
        let mut extrema = Vec::new();
        let mut prev = (lo, self.eval(lo)?.1);
        for i in 1..=n {
            let z = (lo + i as f64 * step).min(hi);
            let d = self.eval(z)?.1;
            if d == 0.0 || d.signum() != prev.1.signum() {
                let zr = find_root(|z| Ok(self.eval(z)?.1), prev.0, z)?;
                extrema.push((zr, self.eval(zr)?.0));
            }
            prev = (z, d);
        }
        if extrema.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "fit window [{lo}, {hi}] holds only {} extrema",
                extrema.len()
            )));
        }
        let (num, den) = extrema.iter().fold((0.0, 0.0), |(a, b), &(z, u)| {
            let w = z.abs().powf(-0.25);
            (a + u.abs() * w, b + w * w)
        });
        let r_hat = num / den;
        let r2 = r_hat * r_hat;
        let s = |z: f64| 2.0 / 3.0 * z.abs().powf(1.5) - 0.75 * r2 * z.abs().ln();
        // at an extremum s − θ₀ ≡ ±π/2 with the sign of u
        let mean: Complex64 = extrema
            .iter()
            .map(|&(z, u)| Complex64::from_polar(1.0, s(z) - u.signum() * FRAC_PI_2))
            .sum();
        Ok(PainleveFit {
            k0: self.k0,
            window: (lo, hi),
            extrema: extrema.len(),
            r_hat,
            r_expected: expected_r(self.k0),
            theta_hat: mean.arg(),
            theta_expected: expected_theta(self.k0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_checks() {
        assert!(matches!(painleve_profile(1.0, -10.0), Err(Error::Domain { .. })));
        assert!(matches!(painleve_profile(0.0, -10.0), Err(Error::Domain { .. })));
        let p = painleve_profile(0.5, -5.0).unwrap();
        assert!(matches!(p.eval(-6.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn small_k0_reduces_to_airy() {
        let k0 = 1e-4;
        let p = painleve_profile(k0, -5.0).unwrap();
        for i in 0..=40 {
            let z = -5.0 + 0.25 * i as f64;
            let (u, _) = p.eval(z).unwrap();
            assert!((u / k0 - airy(z).0).abs() < 1e-6, "zeta = {z}");
        }
    }

    #[test]
    fn tail_amplitude_and_phase() {
        let p = painleve_profile(0.5, -40.0).unwrap();
        let f = p.fit(-40.0, -20.0).unwrap();
        assert!((f.r_expected - 0.3026).abs() < 1e-4);
        assert!(f.r_relative_error() < 0.02, "{f:?}");
        assert!(f.theta_relative_error() < 0.05, "{f:?}");
    }

    #[test]
    fn hastings_mcleod_boundary_diverges() {
        // k₀ = 1 is the separatrix; just above it the solution blows up
        let e = integrate_from_airy(1.01, -10.0).unwrap_err();
        assert!(matches!(e, Error::Divergence { zeta } if zeta < 0.0 && zeta > -10.0));
    }
}
