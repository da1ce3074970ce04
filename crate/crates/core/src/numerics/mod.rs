//! Numerical building blocks: ODE integration, quadrature, special functions,
//! finite-difference stencils and bracketed root finding.

pub mod ode;
pub mod quad;
pub mod special;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be combined linearly with real weights.
pub trait Linear: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Linear for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Linear for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Finite-difference weights on offsets `-3..=3` (central) or `0..=6` (forward).
pub mod stencil {
    pub const CENTRAL6_D1: [f64; 7] = [
        -1.0 / 60.0,
        3.0 / 20.0,
        -3.0 / 4.0,
        0.0,
        3.0 / 4.0,
        -3.0 / 20.0,
        1.0 / 60.0,
    ];
    pub const CENTRAL6_D2: [f64; 7] = [
        1.0 / 90.0,
        -3.0 / 20.0,
        3.0 / 2.0,
        -49.0 / 18.0,
        3.0 / 2.0,
        -3.0 / 20.0,
        1.0 / 90.0,
    ];
    pub const FORWARD6_D1: [f64; 7] = [
        -49.0 / 20.0,
        6.0,
        -15.0 / 2.0,
        20.0 / 3.0,
        -15.0 / 4.0,
        6.0 / 5.0,
        -1.0 / 6.0,
    ];
    /// Offsets `-2..=2`.
    pub const CENTRAL4_D1: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
    /// Offsets `0..=4`.
    pub const FORWARD4_D1: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0];
}

/// Applies a stencil whose first weight sits at offset `first` (in units of `h`).
pub fn apply_stencil<T, F>(weights: &[f64], first: i32, h: f64, mut f: F) -> T
where
    T: Linear,
    F: FnMut(f64) -> T,
{
    let mut acc = T::zero();
    for (k, w) in weights.iter().enumerate() {
        if *w != 0.0 {
            acc = acc + f((first + k as i32) as f64 * h) * *w;
        }
    }
    acc
}

/// First derivative of `f` at offset 0, 4th order, falling back to one-sided
/// stencils when the point is within `2h` of the ends of `[lo, hi]`.
pub fn derivative4<T, F>(f: F, t: f64, h: f64, lo: f64, hi: f64) -> T
where
    T: Linear,
    F: FnMut(f64) -> T,
{
    let mut f = f;
    if t - 2.0 * h < lo {
        apply_stencil::<T, _>(&stencil::FORWARD4_D1, 0, h, |s| f(t + s)) * (1.0 / h)
    } else if t + 2.0 * h > hi {
        apply_stencil::<T, _>(&stencil::FORWARD4_D1, 0, h, |s| f(t - s)) * (-1.0 / h)
    } else {
        apply_stencil::<T, _>(&stencil::CENTRAL4_D1, -2, h, |s| f(t + s)) * (1.0 / h)
    }
}

/// Root of a continuous function with `f(lo)` and `f(hi)` of opposite sign,
/// located by the Illinois variant of regula falsi, safeguarded by bisection.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidParameter(format!(
            "root not bracketed on [{lo}, {hi}]"
        )));
    }
    let mut side = 0i8;
    for iter in 0..400 {
        let width = (b - a).abs();
        if width <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) || width == 0.0 {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        // every fourth iteration bisect, which bounds the worst case
        if !(c > a.min(b) && c < a.max(b)) || iter % 4 == 3 {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}
