//! Traveling waves `χ = e^{i(ξy + τ(y² − g₀) + φ)} F(ξ + 2τy)` of
//! `iχ_τ + h₀|χ|²χ = χ_ξξ`, where `F'² = C₀ + g₀F² + h₀F⁴/2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldDerivs};
use crate::numerics::special::jacobi_sn_cn_dn;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `A sech(κz)`
    Bright,
    /// `A tanh(κz)`
    Dark,
    /// `A cn(κz | m)`
    Cn,
    /// `A dn(κz | m)`
    Dn,
}

/// Parameters of the traveling-wave ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub y: f64,
    pub g0: f64,
    pub h0: f64,
    pub c0: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelingWave {
    pub profile: Profile,
    pub params: WaveParams,
    pub amplitude: f64,
    pub kappa: f64,
    /// Elliptic parameter; 1 for bright and dark.
    pub m: f64,
}

fn domain(profile: Profile, violated: &str) -> Error {
    Error::Domain {
        family: format!("{profile:?}").to_lowercase(),
        violated: violated.into(),
    }
}

/// Builds the wave whose profile solves `F'' = g₀F + h₀F³` with the given `C₀`.
///
/// Existence regions: bright `g₀ > 0, h₀ < 0, C₀ = 0`; dark `g₀ < 0, h₀ > 0,
/// C₀ = g₀²/(2h₀)`; cn `h₀ < 0, C₀ > 0`; dn `g₀ > 0, h₀ < 0, 0 > C₀ > g₀²/(2h₀)`.
pub fn traveling_wave(profile: Profile, p: WaveParams) -> Result<TravelingWave> {
    let WaveParams { g0, h0, c0, .. } = p;
    if ![p.y, g0, h0, c0, p.phi].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("wave parameters must be finite".into()));
    }
    let tol = 1e-12 * (1.0 + g0 * g0 / h0.abs().max(f64::MIN_POSITIVE));
    let (amplitude, kappa, m) = match profile {
        Profile::Bright => {
            if !(h0 < 0.0) {
                return Err(domain(profile, "h0 < 0"));
            }
            if !(g0 > 0.0) {
                return Err(domain(profile, "g0 > 0"));
            }
            if c0.abs() > tol {
                return Err(domain(profile, "C0 = 0"));
            }
            let kappa = g0.sqrt();
            (kappa * (-2.0 / h0).sqrt(), kappa, 1.0)
        }
        Profile::Dark => {
            if !(h0 > 0.0) {
                return Err(domain(profile, "h0 > 0"));
            }
            if !(g0 < 0.0) {
                return Err(domain(profile, "g0 < 0"));
            }
            if (c0 - g0 * g0 / (2.0 * h0)).abs() > tol {
                return Err(domain(profile, "C0 = g0^2/(2 h0)"));
            }
            let kappa = (-g0 / 2.0).sqrt();
            (kappa * (2.0 / h0).sqrt(), kappa, 1.0)
        }
        Profile::Cn => {
            if !(h0 < 0.0) {
                return Err(domain(profile, "h0 < 0"));
            }
            if !(c0 > 0.0) {
                return Err(domain(profile, "C0 > 0"));
            }
            let k2 = (g0 * g0 - 2.0 * h0 * c0).sqrt();
            let m = 0.5 * (1.0 + g0 / k2);
            (( -2.0 * m * k2 / h0).sqrt(), k2.sqrt(), m)
        }
        Profile::Dn => {
            if !(h0 < 0.0) {
                return Err(domain(profile, "h0 < 0"));
            }
            if !(g0 > 0.0) {
                return Err(domain(profile, "g0 > 0"));
            }
            if !(c0 < 0.0) {
                return Err(domain(profile, "C0 < 0"));
            }
            if !(g0 * g0 > 2.0 * h0 * c0) {
                return Err(domain(profile, "g0^2 > 2 h0 C0"));
            }
            let k2 = 0.5 * (g0 + (g0 * g0 - 2.0 * h0 * c0).sqrt());
            let m = 1.0 - h0 * c0 / (2.0 * k2 * k2);
            ((-2.0 * k2 / h0).sqrt(), k2.sqrt(), m)
        }
    };
    Ok(TravelingWave {
        profile,
        params: p,
        amplitude,
        kappa,
        m,
    })
}

/// Bright wave of a given amplitude: `κ = A√(−h₀/2)`, `g₀ = κ²`.
pub fn bright(amplitude: f64, h0: f64, y: f64, phi: f64) -> Result<TravelingWave> {
    if !(amplitude > 0.0) || !(h0 < 0.0) {
        return Err(domain(Profile::Bright, "amplitude > 0 and h0 < 0"));
    }
    let kappa = amplitude * (-h0 / 2.0).sqrt();
    traveling_wave(
        Profile::Bright,
        WaveParams {
            y,
            g0: kappa * kappa,
            h0,
            c0: 0.0,
            phi,
        },
    )
}

/// The stationary breather: a bright wave with `C₀ = y = 0`, oscillating at
/// frequency `g₀` about `ξ = 0`.
pub fn breather(g0: f64, h0: f64, phi: f64) -> Result<TravelingWave> {
    traveling_wave(
        Profile::Bright,
        WaveParams {
            y: 0.0,
            g0,
            h0,
            c0: 0.0,
            phi,
        },
    )
}

impl TravelingWave {
    /// `(F, F', F'')` at `z`.
    pub fn profile_at(&self, z: f64) -> (f64, f64, f64) {
        let (a, k, m) = (self.amplitude, self.kappa, self.m);
        let u = k * z;
        match self.profile {
            Profile::Bright => {
                let s = 1.0 / u.cosh();
                let th = u.tanh();
                (a * s, -a * k * s * th, a * k * k * s * (1.0 - 2.0 * s * s))
            }
            Profile::Dark => {
                let s = 1.0 / u.cosh();
                let th = u.tanh();
                (a * th, a * k * s * s, -2.0 * a * k * k * s * s * th)
            }
            Profile::Cn => {
                let (sn, cn, dn) = jacobi_sn_cn_dn(u, m);
                (a * cn, -a * k * sn * dn, -a * k * k * cn * (dn * dn - m * sn * sn))
            }
            Profile::Dn => {
                let (sn, cn, dn) = jacobi_sn_cn_dn(u, m);
                (a * dn, -a * k * m * sn * cn, -a * k * k * m * dn * (cn * cn - sn * sn))
            }
        }
    }

    /// `F'² − C₀ − g₀F² − h₀F⁴/2`.
    pub fn first_integral_residual(&self, z: f64) -> f64 {
        let (f, fp, _) = self.profile_at(z);
        let p = &self.params;
        fp * fp - p.c0 - p.g0 * f * f - 0.5 * p.h0 * f.powi(4)
    }

    fn phase(&self, xi: f64, tau: f64) -> f64 {
        let p = &self.params;
        xi * p.y + tau * (p.y * p.y - p.g0) + p.phi
    }
}

impl Field for TravelingWave {
    fn value(&self, xi: f64, tau: f64) -> Result<Complex64> {
        let (f, _, _) = self.profile_at(xi + 2.0 * tau * self.params.y);
        Ok(Complex64::from_polar(f, self.phase(xi, tau)))
    }

    fn derivatives(&self, xi: f64, tau: f64) -> Option<Result<FieldDerivs>> {
        let y = self.params.y;
        let (f, fp, fpp) = self.profile_at(xi + 2.0 * tau * y);
        let e = Complex64::from_polar(1.0, self.phase(xi, tau));
        Some(Ok(FieldDerivs {
            value: e * f,
            dx: e * (I * y * f + fp),
            dxx: e * (-y * y * f + 2.0 * I * y * fp + fpp),
            dt: e * (I * (y * y - self.params.g0) * f + 2.0 * y * fp),
        }))
    }
}
