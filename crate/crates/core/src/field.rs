//! Complex fields evaluable at `(x, t)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::stencil;

/// Value and first/second space and first time derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDerivs {
    pub value: Complex64,
    pub dx: Complex64,
    pub dxx: Complex64,
    pub dt: Complex64,
}

pub trait Field: Send + Sync {
    fn value(&self, x: f64, t: f64) -> Result<Complex64>;

    /// Analytic derivatives, when the field provides them.
    fn derivatives(&self, _x: f64, _t: f64) -> Option<Result<FieldDerivs>> {
        None
    }

    /// Closed interval of times on which the field may be evaluated.
    fn time_domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// Shared, immutable field handle.
pub type ComplexField = Arc<dyn Field>;

/// A field defined by a closure.
pub struct FnField<F> {
    f: F,
    domain: (f64, f64),
}

impl<F> FnField<F>
where
    F: Fn(f64, f64) -> Complex64 + Send + Sync,
{
    pub fn new(f: F) -> Self {
        Self {
            f,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn with_time_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }
}

impl<F> Field for FnField<F>
where
    F: Fn(f64, f64) -> Complex64 + Send + Sync,
{
    fn value(&self, x: f64, t: f64) -> Result<Complex64> {
        let v = (self.f)(x, t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteField { x, t })
        }
    }

    fn time_domain(&self) -> (f64, f64) {
        self.domain
    }
}

/// Wraps a closure as a shared field.
pub fn from_fn(f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> ComplexField {
    Arc::new(FnField::new(f))
}

/// `c · field`, keeping analytic derivatives.
pub struct Scaled {
    pub inner: ComplexField,
    pub factor: Complex64,
}

impl Field for Scaled {
    fn value(&self, x: f64, t: f64) -> Result<Complex64> {
        Ok(self.factor * self.inner.value(x, t)?)
    }

    fn derivatives(&self, x: f64, t: f64) -> Option<Result<FieldDerivs>> {
        let c = self.factor;
        self.inner.derivatives(x, t).map(|r| {
            r.map(|d| FieldDerivs {
                value: c * d.value,
                dx: c * d.dx,
                dxx: c * d.dxx,
                dt: c * d.dt,
            })
        })
    }

    fn time_domain(&self) -> (f64, f64) {
        self.inner.time_domain()
    }
}

/// `ψ, ψ_x, ψ_xx, ψ_t` by 6th-order differences with steps `hx`, `ht`.
///
/// Near the ends of the field's time domain the time derivative switches to
/// a one-sided stencil.
pub fn difference_derivatives(field: &dyn Field, x: f64, t: f64, hx: f64, ht: f64) -> Result<FieldDerivs> {
    let value = field.value(x, t)?;
    let mut xs = [Complex64::new(0.0, 0.0); 7];
    for (k, v) in xs.iter_mut().enumerate() {
        *v = if k == 3 { value } else { field.value(x + (k as f64 - 3.0) * hx, t)? };
    }
    let dx = dot(&stencil::CENTRAL6_D1, &xs) / hx;
    let dxx = dot(&stencil::CENTRAL6_D2, &xs) / (hx * hx);
    let (lo, hi) = field.time_domain();
    let mut ts = [Complex64::new(0.0, 0.0); 7];
    let (first, sign) = if t - 3.0 * ht < lo {
        (0.0, 1.0)
    } else if t + 3.0 * ht > hi {
        (0.0, -1.0)
    } else {
        (-3.0, 1.0)
    };
    for (k, v) in ts.iter_mut().enumerate() {
        let off = sign * (first + k as f64);
        *v = if off == 0.0 { value } else { field.value(x, t + off * ht)? };
    }
    let dt = if first == 0.0 {
        dot(&stencil::FORWARD6_D1, &ts) * (sign / ht)
    } else {
        dot(&stencil::CENTRAL6_D1, &ts) / ht
    };
    Ok(FieldDerivs { value, dx, dxx, dt })
}

fn dot(w: &[f64; 7], v: &[Complex64; 7]) -> Complex64 {
    w.iter().zip(v).map(|(w, v)| v * *w).sum()
}

/// Samples of a field on a tensor grid, stored time-major: `values[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FieldSamples {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.xs.len() + i]
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        let nx = self.xs.len();
        &self.values[j * nx..(j + 1) * nx]
    }

    /// Evaluates `field` at every grid node in parallel.
    pub fn sample(field: &dyn Field, xs: &[f64], ts: &[f64]) -> Result<Self> {
        use rayon::prelude::*;
        let nx = xs.len();
        let values = (0..nx * ts.len())
            .into_par_iter()
            .map(|k| field.value(xs[k % nx], ts[k / nx]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            xs: xs.to_vec(),
            ts: ts.to_vec(),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_field_rejects_non_finite_values() {
        let f = from_fn(|x, _| Complex64::new(1.0 / x, 0.0));
        assert!(f.value(2.0, 0.0).is_ok());
        assert!(matches!(f.value(0.0, 1.5), Err(Error::NonFiniteField { t, .. }) if t == 1.5));
    }

    #[test]
    fn differences_match_a_plane_wave() {
        let f = FnField::new(|x: f64, t: f64| Complex64::from_polar(1.0, 0.8 * x - 0.3 * t)).with_time_domain(0.0, 1.0);
        for t in [0.0, 0.5, 1.0] {
            let d = difference_derivatives(&f, 0.2, t, 1e-2, 1e-2).unwrap();
            let v = d.value;
            assert!((d.dx - Complex64::new(0.0, 0.8) * v).norm() < 1e-11);
            assert!((d.dxx + 0.64 * v).norm() < 1e-9);
            assert!((d.dt - Complex64::new(0.0, -0.3) * v).norm() < 1e-10);
        }
    }

    #[test]
    fn samples_are_time_major() {
        let f = from_fn(|x, t| Complex64::new(x, t));
        let s = FieldSamples::sample(f.as_ref(), &[0.0, 1.0, 2.0], &[10.0, 20.0]).unwrap();
        assert_eq!(s.at(2, 1), Complex64::new(2.0, 20.0));
        assert_eq!(s.row(0)[1], Complex64::new(1.0, 10.0));
    }
}
