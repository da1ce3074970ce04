//! One- and two-soliton solutions of `iΨ_T + Ψ_XX + 2|Ψ|²Ψ = 0`.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{Field, FieldDerivs};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `Ψ₁ = e^{iT} sech X`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OneSoliton;

/// `Ψ₂ = 4e^{iT}(cosh 3X + 3e^{8iT} cosh X)/(cosh 4X + 4 cosh 2X + 3 cos 8T)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoSoliton;

pub fn one_soliton(x: f64, t: f64) -> Complex64 {
    Complex64::from_polar(sech(x), t)
}

pub fn two_soliton(x: f64, t: f64) -> Complex64 {
    TwoSoliton.derivs(x, t).value
}

fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

impl Field for OneSoliton {
    fn value(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(one_soliton(x, t))
    }

    fn derivatives(&self, x: f64, t: f64) -> Option<Result<FieldDerivs>> {
        let v = one_soliton(x, t);
        let s = sech(x);
        Some(Ok(FieldDerivs {
            value: v,
            dx: -x.tanh() * v,
            dxx: (1.0 - 2.0 * s * s) * v,
            dt: I * v,
        }))
    }
}

impl TwoSoliton {
    // Numerator and denominator are both scaled by 2e^{−4|X|}, using
    // 2cosh(nX)e^{−4|X|} = E^{4−n}(1 + E^{2n}) with E = e^{−|X|}.
    fn derivs(&self, x: f64, t: f64) -> FieldDerivs {
        let e = (-x.abs()).exp();
        let sg = x.signum();
        let ch = |n: i32| e.powi(4 - n) * (1.0 + e.powi(2 * n));
        let sh = |n: i32| sg * e.powi(4 - n) * (1.0 - e.powi(2 * n));
        let w = Complex64::from_polar(1.0, 8.0 * t);
        let (s8, c8) = (8.0 * t).sin_cos();

        let n = ch(3) + 3.0 * w * ch(1);
        let n1 = 3.0 * sh(3) + 3.0 * w * sh(1);
        let n2 = 9.0 * ch(3) + 3.0 * w * ch(1);
        let nt = 24.0 * I * w * ch(1);
        let d = ch(4) + 4.0 * ch(2) + 6.0 * c8 * e.powi(4);
        let d1 = 4.0 * sh(4) + 8.0 * sh(2);
        let d2 = 16.0 * ch(4) + 16.0 * ch(2);
        let dt = -48.0 * s8 * e.powi(4);

        let g = 4.0 * Complex64::from_polar(1.0, t);
        let q = n / d;
        let q1 = n1 / d - n * d1 / (d * d);
        let q2 = n2 / d - 2.0 * n1 * d1 / (d * d) - n * d2 / (d * d) + 2.0 * n * d1 * d1 / (d * d * d);
        let qt = nt / d - n * dt / (d * d);
        FieldDerivs {
            value: g * q,
            dx: g * q1,
            dxx: g * q2,
            dt: I * g * q + g * qt,
        }
    }
}

impl Field for TwoSoliton {
    fn value(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.derivs(x, t).value)
    }

    fn derivatives(&self, x: f64, t: f64) -> Option<Result<FieldDerivs>> {
        Some(Ok(self.derivs(x, t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn point_values() {
        assert_eq!(one_soliton(0.0, 0.0), Complex64::new(1.0, 0.0));
        assert!((one_soliton(0.0, FRAC_PI_2) - I).norm() < 1e-16);
        assert!((two_soliton(0.0, 0.0) - 2.0).norm() < 1e-15);
    }

    #[test]
    fn two_soliton_starts_as_twice_sech() {
        for k in 0..50 {
            let x = -12.0 + 0.49 * k as f64;
            assert!((two_soliton(x, 0.0) - 2.0 * sech(x)).norm() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn no_overflow_far_out() {
        for x in [-800.0, 800.0] {
            let v = TwoSoliton.derivs(x, 0.3);
            assert!(v.value.is_finite() && v.dxx.is_finite() && v.value.norm() < 1e-300);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-3;
        for (x, t) in [(0.4, 0.1), (-2.3, 0.7), (5.0, 0.35)] {
            let d = TwoSoliton.derivs(x, t);
            let v = |x, t| two_soliton(x, t);
            let dx = (v(x - 2.0 * h, t) - 8.0 * v(x - h, t) + 8.0 * v(x + h, t) - v(x + 2.0 * h, t)) / (12.0 * h);
            let dt = (v(x, t - 2.0 * h) - 8.0 * v(x, t - h) + 8.0 * v(x, t + h) - v(x, t + 2.0 * h)) / (12.0 * h);
            let dxx = (-v(x - 2.0 * h, t) + 16.0 * v(x - h, t) - 30.0 * v(x, t) + 16.0 * v(x + h, t)
                - v(x + 2.0 * h, t))
                / (12.0 * h * h);
            assert!((d.dx - dx).norm() < 1e-7, "{} vs {}", d.dx, dx);
            assert!((d.dt - dt).norm() < 1e-7);
            assert!((d.dxx - dxx).norm() < 1e-6);
        }
    }
}
