//! Standard solutions μ₀, μ₁ of the characteristic equation
//! `μ'' − τ(t) μ' + 4σ(t) μ = 0` with `μ₀(0) = 0, μ₀'(0) = 2a(0)` and
//! `μ₁(0) = 1, μ₁'(0) = 0`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::coeffs::{eval_coeffs, tau_sigma_from, CoefficientSet, Preset};
use crate::error::{Error, Result};
use crate::numerics::ode::{dopri5, DenseSolution, OdeOptions};
use crate::numerics::quad::{integrate, QuadOptions};
use crate::verify::report::{Method, ResidualReport, Sampling, TimeSamples};

pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_ATOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisValues {
    pub mu0: f64,
    pub mu0_prime: f64,
    pub mu1: f64,
    pub mu1_prime: f64,
}

/// Closed-form standard solutions of the preset families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactBasis {
    /// `μ₀ = 2t, μ₁ = 1` (free particle, linear potential).
    Linear,
    Harmonic { omega: f64 },
    Exponential { k: f64 },
}

impl ExactBasis {
    pub fn for_preset(p: Preset) -> Self {
        match p {
            Preset::FreeParticle | Preset::Plasma { .. } | Preset::Example3 { .. } => {
                ExactBasis::Linear
            }
            Preset::Harmonic { omega } => ExactBasis::Harmonic { omega },
            Preset::Exponential { k } => ExactBasis::Exponential { k },
        }
    }

    pub fn eval(&self, t: f64) -> BasisValues {
        match *self {
            ExactBasis::Linear => BasisValues {
                mu0: 2.0 * t,
                mu0_prime: 2.0,
                mu1: 1.0,
                mu1_prime: 0.0,
            },
            ExactBasis::Harmonic { omega } => {
                let (s, c) = (omega * t).sin_cos();
                BasisValues {
                    mu0: 2.0 * s / omega,
                    mu0_prime: 2.0 * c,
                    mu1: c,
                    mu1_prime: -omega * s,
                }
            }
            ExactBasis::Exponential { k } => {
                let e = (-4.0 * k * t).exp();
                BasisValues {
                    mu0: -(-4.0 * k * t).exp_m1() / (2.0 * k),
                    mu0_prime: 2.0 * e,
                    mu1: 1.0,
                    mu1_prime: 0.0,
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Integrated(DenseSolution),
    Exact(ExactBasis),
}

/// Dense standard solutions of the characteristic equation.
#[derive(Debug, Clone)]
pub struct CharacteristicBasis {
    kind: Kind,
    set: CoefficientSet,
    t_span: (f64, f64),
    rtol: f64,
    atol: f64,
}

impl CharacteristicBasis {
    /// Closed-form basis of a preset coefficient set (valid for all t).
    pub fn exact(set: &CoefficientSet) -> Option<Self> {
        let p = set.preset_kind()?;
        Some(Self {
            kind: Kind::Exact(ExactBasis::for_preset(p)),
            set: set.clone(),
            t_span: (f64::NEG_INFINITY, f64::INFINITY),
            rtol: 0.0,
            atol: 0.0,
        })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.kind, Kind::Exact(_))
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.set
    }

    pub fn t_span(&self) -> (f64, f64) {
        self.t_span
    }

    pub fn tolerance(&self) -> (f64, f64) {
        (self.rtol, self.atol)
    }

    pub fn eval(&self, t: f64) -> Result<BasisValues> {
        match &self.kind {
            Kind::Exact(e) => Ok(e.eval(t)),
            Kind::Integrated(sol) => {
                let mut y = [0.0; 4];
                sol.eval_into(t, &mut y)?;
                if t == 0.0 {
                    // reproduce the initial conditions exactly
                    y = [0.0, y[1], 1.0, 0.0];
                }
                Ok(BasisValues {
                    mu0: y[0],
                    mu0_prime: y[1],
                    mu1: y[2],
                    mu1_prime: y[3],
                })
            }
        }
    }

    /// Sample times on `(0, t]` at which sign changes are looked for.
    fn probe_times(&self, t: f64) -> Vec<f64> {
        match &self.kind {
            Kind::Integrated(sol) => {
                let mut v: Vec<f64> = sol
                    .step_times()
                    .into_iter()
                    .filter(|&s| s > 0.0 && s < t)
                    .collect();
                v.push(t);
                v
            }
            Kind::Exact(_) => {
                let n = 512;
                (1..=n).map(|k| t * k as f64 / n as f64).collect()
            }
        }
    }

    /// Number of zeros of μ₀ in the open interval `(0, t)`.
    pub fn mu0_zero_count(&self, t: f64) -> Result<usize> {
        if t <= 0.0 {
            return Ok(0);
        }
        if let Kind::Exact(ExactBasis::Harmonic { omega }) = self.kind {
            let x = omega.abs() * t / PI;
            return Ok((x.ceil() as usize).saturating_sub(1));
        }
        if let Kind::Exact(_) = self.kind {
            return Ok(0);
        }
        let mut count = 0;
        let mut prev = self.eval(0.0)?.mu0_prime.signum();
        for s in self.probe_times(t) {
            let v = self.eval(s)?.mu0;
            if v != 0.0 && v.signum() != prev {
                count += 1;
                prev = v.signum();
            }
        }
        Ok(count)
    }

    /// First sampled point in `(0, t]` where μ₀' has changed sign, if any.
    pub fn mu0_prime_sign_change(&self, t: f64) -> Result<Option<f64>> {
        if t <= 0.0 {
            return Ok(None);
        }
        if let Kind::Exact(e) = self.kind {
            return Ok(match e {
                ExactBasis::Harmonic { omega } => {
                    let first = PI / (2.0 * omega.abs());
                    (t >= first).then_some(first)
                }
                _ => None,
            });
        }
        let s0 = self.eval(0.0)?.mu0_prime.signum();
        for s in self.probe_times(t) {
            let v = self.eval(s)?.mu0_prime;
            if v == 0.0 || v.signum() != s0 {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }
}

/// Integrates both standard solutions on `[0, t_end]` with DOPRI5.
pub fn solve_characteristic(
    set: &CoefficientSet,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<CharacteristicBasis> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(Error::InvalidParameter("rtol and atol must be positive".into()));
    }
    let v0 = eval_coeffs(set, 0.0)?;
    if v0.a == 0.0 {
        return Err(Error::SingularCoefficient { t: 0.0 });
    }
    let mut failure: Option<Error> = None;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let ts = eval_coeffs(set, t).and_then(|v| tau_sigma_from(&v, t));
        match ts {
            Ok((tau, sigma)) => {
                dy[0] = y[1];
                dy[1] = tau * y[1] - 4.0 * sigma * y[0];
                dy[2] = y[3];
                dy[3] = tau * y[3] - 4.0 * sigma * y[2];
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e);
                }
                dy.iter_mut().for_each(|d| *d = f64::NAN);
            }
        }
    };
    let opts = OdeOptions::with_tolerances(rtol, atol);
    let res = dopri5(rhs, 0.0, &[0.0, 2.0 * v0.a, 1.0, 0.0], t_end, &opts);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(CharacteristicBasis {
        kind: Kind::Integrated(res?),
        set: set.clone(),
        t_span: (0.0, t_end),
        rtol,
        atol,
    })
}

/// `∫₀ᵗ τ(s) ds`, with the `a'/a` part integrated exactly.
pub fn integrated_tau(set: &CoefficientSet, t: f64) -> Result<f64> {
    let a0 = set.a.value(0.0);
    let at = set.a.value(t);
    if at == 0.0 || (at > 0.0) != (a0 > 0.0) {
        return Err(Error::SingularCoefficient { t });
    }
    let mut total = (at / a0).ln();
    if !(set.c.is_zero() && set.d.is_zero()) {
        let r = integrate(
            |s| 4.0 * set.d.value(s) - 2.0 * set.c.value(s),
            0.0,
            t,
            &QuadOptions::default(),
        )?;
        total += r.value;
    }
    Ok(total)
}

/// Relative deviation of `W(t)·exp(−∫τ)` from `W(0) = −2a(0)` over `t_grid`.
pub fn wronskian_check(basis: &CharacteristicBasis, t_grid: &[f64]) -> Result<ResidualReport> {
    let set = basis.coefficients();
    let w0 = -2.0 * set.a.value(0.0);
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let b = basis.eval(t)?;
        let w = b.mu0 * b.mu1_prime - b.mu1 * b.mu0_prime;
        let scaled = w * (-integrated_tau(set, t)?).exp();
        samples.push((0.0, t, ((scaled - w0) / w0).abs()));
    }
    let ts = TimeSamples::of(t_grid);
    let weight = if t_grid.len() > 1 {
        (ts.t1 - ts.t0) / (t_grid.len() - 1) as f64
    } else {
        1.0
    };
    Ok(ResidualReport::from_samples(
        &samples,
        weight,
        Method::Direct,
        Sampling::Times(ts),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn harmonic_closed_form() {
        let omega = 1.7;
        let set = CoefficientSet::harmonic(omega).unwrap();
        let b = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        for t in grid(0.0, 1.0, 101) {
            let v = b.eval(t).unwrap();
            assert!((v.mu0 - 2.0 / omega * (omega * t).sin()).abs() < 1e-9);
            assert!((v.mu1 - (omega * t).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn exponential_closed_form() {
        let set = CoefficientSet::exponential(1.0).unwrap();
        let b = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let e = ExactBasis::Exponential { k: 1.0 };
        for t in grid(0.0, 1.0, 57) {
            let (v, x) = (b.eval(t).unwrap(), e.eval(t));
            assert!((v.mu0 - x.mu0).abs() < 1e-9 && (v.mu0_prime - x.mu0_prime).abs() < 1e-9);
            assert!((v.mu1 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn free_particle_is_exact() {
        let set = CoefficientSet::free_particle();
        let b = solve_characteristic(&set, 2.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let v = b.eval(1.3).unwrap();
        assert!((v.mu0 - 2.6).abs() < 1e-13 && (v.mu1 - 1.0).abs() < 1e-15);
        let r = wronskian_check(&b, &grid(0.0, 2.0, 20)).unwrap();
        assert!(r.sup_norm < 1e-13);
    }

    #[test]
    fn initial_conditions_exact() {
        let set = CoefficientSet::new(
            crate::coeffs::Coefficient::constant(-0.5),
            crate::coeffs::Coefficient::constant(1.0),
            crate::coeffs::Coefficient::constant(0.2),
            crate::coeffs::Coefficient::constant(0.1),
            crate::coeffs::Coefficient::zero(),
            crate::coeffs::Coefficient::zero(),
            1.0,
        )
        .unwrap();
        let b = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let v = b.eval(0.0).unwrap();
        assert_eq!((v.mu0, v.mu0_prime, v.mu1, v.mu1_prime), (0.0, -1.0, 1.0, 0.0));
    }

    #[test]
    fn wronskian_examples() {
        let set = CoefficientSet::harmonic(1.0).unwrap();
        let b = solve_characteristic(&set, 3.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        assert!(wronskian_check(&b, &grid(0.0, 3.0, 50)).unwrap().sup_norm <= 1e-8);
        let set = CoefficientSet::exponential(1.0).unwrap();
        let b = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        assert!(wronskian_check(&b, &grid(0.0, 1.0, 50)).unwrap().sup_norm <= 1e-8);
        let v = b.eval(0.8).unwrap();
        let w = v.mu0 * v.mu1_prime - v.mu1 * v.mu0_prime;
        assert!((w / (-2.0 * (-3.2f64).exp()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_counting() {
        let set = CoefficientSet::harmonic(1.0).unwrap();
        let b = solve_characteristic(&set, 7.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let e = CharacteristicBasis::exact(&set).unwrap();
        for &(t, n) in &[(1.0, 0), (3.0, 0), (3.5, 1), (6.9, 2)] {
            assert_eq!(b.mu0_zero_count(t).unwrap(), n, "t = {t}");
            assert_eq!(e.mu0_zero_count(t).unwrap(), n, "t = {t}");
        }
        assert_eq!(e.mu0_zero_count(PI).unwrap(), 0);
        assert!(b.mu0_prime_sign_change(1.5).unwrap().is_none());
        assert!(b.mu0_prime_sign_change(1.6).unwrap().is_some());
        assert!(e.mu0_prime_sign_change(1.6).unwrap().is_some());
    }

    #[test]
    fn out_of_span_and_bad_arguments() {
        let set = CoefficientSet::free_particle();
        let b = solve_characteristic(&set, 1.0, 1e-10, 1e-12).unwrap();
        assert!(matches!(b.eval(1.5), Err(Error::OutOfDomain { .. })));
        assert!(solve_characteristic(&set, -1.0, 1e-10, 1e-12).is_err());
        assert!(solve_characteristic(&set, 1.0, 0.0, 1e-12).is_err());
    }

    #[test]
    fn coefficient_blow_up_reports_failure() {
        let mut set = CoefficientSet::free_particle();
        set.b = crate::coeffs::Coefficient::from_fn(|t| 1.0 / (0.5 - t));
        let err = solve_characteristic(&set, 1.0, 1e-10, 1e-12).unwrap_err();
        assert!(matches!(
            err,
            Error::IntegrationFailure { .. } | Error::NonFiniteCoefficient { .. }
        ));
    }
}
