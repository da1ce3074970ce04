//! Time-dependent coefficients of the nonautonomous equation
//!
//! ```text
//! i ψ_t = −a ψ_xx + b x² ψ − i c x ψ_x − i d ψ − f x ψ + i g ψ_x + h |ψ|² ψ
//! ```
//!
//! Each coefficient is either a finite sum of elementary [`Term`]s, which carry
//! exact derivatives, or an arbitrary closure.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step of the central difference used for closures without a derivative.
pub const CLOSURE_DIFF_STEP: f64 = 1e-6;

/// One elementary term: `coef·tⁿ`, `coef·sin(w t)`, `coef·cos(w t)` or `coef·exp(r t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    Poly { coef: f64, n: u32 },
    Sin { coef: f64, w: f64 },
    Cos { coef: f64, w: f64 },
    Exp { coef: f64, r: f64 },
}

impl Term {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Term::Poly { coef, n } => coef * t.powi(n as i32),
            Term::Sin { coef, w } => coef * (w * t).sin(),
            Term::Cos { coef, w } => coef * (w * t).cos(),
            Term::Exp { coef, r } => coef * (r * t).exp(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Term::Poly { n: 0, .. } => 0.0,
            Term::Poly { coef, n } => coef * n as f64 * t.powi(n as i32 - 1),
            Term::Sin { coef, w } => coef * w * (w * t).cos(),
            Term::Cos { coef, w } => -coef * w * (w * t).sin(),
            Term::Exp { coef, r } => coef * r * (r * t).exp(),
        }
    }

    /// `∫₀ᵗ term(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            Term::Poly { coef, n } => coef * t.powi(n as i32 + 1) / (n as f64 + 1.0),
            Term::Sin { w, .. } if w == 0.0 => 0.0,
            Term::Sin { coef, w } => coef * (1.0 - (w * t).cos()) / w,
            Term::Cos { coef, w } if w == 0.0 => coef * t,
            Term::Cos { coef, w } => coef * (w * t).sin() / w,
            Term::Exp { coef, r } if r == 0.0 => coef * t,
            Term::Exp { coef, r } => coef * (r * t).exp_m1() / r,
        }
    }

    fn coef(&self) -> f64 {
        match *self {
            Term::Poly { coef, .. }
            | Term::Sin { coef, .. }
            | Term::Cos { coef, .. }
            | Term::Exp { coef, .. } => coef,
        }
    }
}

/// A real coefficient function of time.
#[derive(Clone)]
pub enum Coefficient {
    Terms(Vec<Term>),
    Closure {
        value: ScalarFn,
        derivative: Option<ScalarFn>,
    },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Terms(terms) => f.debug_tuple("Terms").field(terms).finish(),
            Coefficient::Closure { derivative, .. } => f
                .debug_struct("Closure")
                .field("analytic_derivative", &derivative.is_some())
                .finish(),
        }
    }
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::zero()
    }
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Terms(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Coefficient::Terms(vec![Term::Poly { coef: c, n: 0 }])
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Coefficient::Terms(terms)
    }

    /// A closure whose derivative is taken by central differences at step [`CLOSURE_DIFF_STEP`].
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Closure {
            value: Arc::new(f),
            derivative: None,
        }
    }

    pub fn from_fn_with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Coefficient::Closure {
            value: Arc::new(f),
            derivative: Some(Arc::new(df)),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Coefficient::Terms(terms) => terms.iter().map(|x| x.value(t)).sum(),
            Coefficient::Closure { value, .. } => value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Coefficient::Terms(terms) => terms.iter().map(|x| x.derivative(t)).sum(),
            Coefficient::Closure {
                derivative: Some(d),
                ..
            } => d(t),
            Coefficient::Closure { value, .. } => {
                let h = CLOSURE_DIFF_STEP;
                (value(t + h) - value(t - h)) / (2.0 * h)
            }
        }
    }

    /// `∫₀ᵗ` of the coefficient when it is a sum of terms.
    pub fn exact_integral(&self, t: f64) -> Option<f64> {
        match self {
            Coefficient::Terms(terms) => Some(terms.iter().map(|x| x.integral(t)).sum()),
            Coefficient::Closure { .. } => None,
        }
    }

    /// True only when the coefficient is structurally zero (no closures).
    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Terms(terms) => terms.iter().all(|t| t.coef() == 0.0),
            Coefficient::Closure { .. } => false,
        }
    }
}

/// Named coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    FreeParticle,
    Harmonic {
        omega: f64,
    },
    Exponential {
        k: f64,
    },
    Plasma {
        k: f64,
    },
    Example3 {
        alpha0: f64,
        beta0: f64,
        gamma0: f64,
        g0: f64,
    },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::FreeParticle => "free_particle",
            Preset::Harmonic { .. } => "harmonic",
            Preset::Exponential { .. } => "exponential",
            Preset::Plasma { .. } => "plasma",
            Preset::Example3 { .. } => "example3",
        }
    }
}

/// Coefficient values at one instant, plus the two derivatives entering τ and σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffValues {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub f: f64,
    pub g: f64,
    pub a_prime: f64,
    pub d_prime: f64,
}

/// The six coefficients and the nonlinearity strength `h0`.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub a: Coefficient,
    pub b: Coefficient,
    pub c: Coefficient,
    pub d: Coefficient,
    pub f: Coefficient,
    pub g: Coefficient,
    pub h0: f64,
    preset: Option<Preset>,
}

/// Nonlinearity strength used by the presets unless overridden.
pub const DEFAULT_H0: f64 = -2.0;

impl CoefficientSet {
    pub fn new(
        a: Coefficient,
        b: Coefficient,
        c: Coefficient,
        d: Coefficient,
        f: Coefficient,
        g: Coefficient,
        h0: f64,
    ) -> Result<Self> {
        let set = Self {
            a,
            b,
            c,
            d,
            f,
            g,
            h0,
            preset: None,
        };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<()> {
        if !self.h0.is_finite() {
            return Err(Error::InvalidParameter("h0 must be finite".into()));
        }
        let v = self.eval(0.0)?;
        if v.a == 0.0 {
            return Err(Error::SingularCoefficient { t: 0.0 });
        }
        Ok(())
    }

    pub fn preset(p: Preset) -> Result<Self> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{}: {what}", p.name())))
            }
        };
        let one = Coefficient::constant(1.0);
        let z = Coefficient::zero;
        let set = match p {
            Preset::FreeParticle => (one, z(), z(), z(), z(), z()),
            Preset::Harmonic { omega } => {
                check(omega != 0.0 && omega.is_finite(), "omega must be nonzero")?;
                (one, Coefficient::constant(omega * omega / 4.0), z(), z(), z(), z())
            }
            Preset::Exponential { k } => {
                check(k != 0.0 && k.is_finite(), "k must be nonzero")?;
                let b = Coefficient::constant(-k * k);
                let d = Coefficient::constant(-k);
                (one, b, z(), d, z(), z())
            }
            Preset::Plasma { k } => {
                check(k != 0.0 && k.is_finite(), "k must be nonzero")?;
                (one, z(), z(), z(), Coefficient::constant(2.0 * k), z())
            }
            Preset::Example3 {
                alpha0,
                beta0,
                gamma0,
                g0,
            } => {
                check(
                    [alpha0, beta0, gamma0, g0].iter().all(|v| v.is_finite()),
                    "parameters must be finite",
                )?;
                let s = g0 * beta0.powi(3);
                let f = Coefficient::from_fn_with_derivative(
                    move |t| -s / (1.0 + 4.0 * alpha0 * t).powi(3),
                    move |t| 12.0 * alpha0 * s / (1.0 + 4.0 * alpha0 * t).powi(4),
                );
                (one, z(), z(), z(), f, z())
            }
        };
        let (a, b, c, d, f, g) = set;
        Ok(Self {
            a,
            b,
            c,
            d,
            f,
            g,
            h0: DEFAULT_H0,
            preset: Some(p),
        })
    }

    pub fn free_particle() -> Self {
        Self::preset(Preset::FreeParticle).expect("free particle preset is always valid")
    }

    pub fn harmonic(omega: f64) -> Result<Self> {
        Self::preset(Preset::Harmonic { omega })
    }

    pub fn exponential(k: f64) -> Result<Self> {
        Self::preset(Preset::Exponential { k })
    }

    pub fn plasma(k: f64) -> Result<Self> {
        Self::preset(Preset::Plasma { k })
    }

    pub fn example3(alpha0: f64, beta0: f64, gamma0: f64, g0: f64) -> Result<Self> {
        Self::preset(Preset::Example3 {
            alpha0,
            beta0,
            gamma0,
            g0,
        })
    }

    pub fn with_h0(mut self, h0: f64) -> Self {
        self.h0 = h0;
        self
    }

    pub fn preset_kind(&self) -> Option<Preset> {
        self.preset
    }

    pub fn eval(&self, t: f64) -> Result<CoeffValues> {
        eval_coeffs(self, t)
    }

    /// Parses the JSON coefficient format, see [`CoefficientFile`].
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CoefficientFile = serde_json::from_str(text)?;
        file.into_set()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// JSON description of a coefficient set. Each coefficient is a number or a list
/// of terms; omitted coefficients are zero.
///
/// ```json
/// {"a": 1.0, "b": [{"kind": "cos", "coef": 0.25, "w": 2.0}], "h0": -2.0}
/// ```
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    #[serde(default)]
    pub a: Option<CoeffSpec>,
    #[serde(default)]
    pub b: Option<CoeffSpec>,
    #[serde(default)]
    pub c: Option<CoeffSpec>,
    #[serde(default)]
    pub d: Option<CoeffSpec>,
    #[serde(default)]
    pub f: Option<CoeffSpec>,
    #[serde(default)]
    pub g: Option<CoeffSpec>,
    #[serde(default)]
    pub h0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffSpec {
    Constant(f64),
    Terms(Vec<Term>),
}

impl CoeffSpec {
    fn into_coefficient(self) -> Coefficient {
        match self {
            CoeffSpec::Constant(c) => Coefficient::constant(c),
            CoeffSpec::Terms(t) => Coefficient::Terms(t),
        }
    }
}

impl CoefficientFile {
    pub fn into_set(self) -> Result<CoefficientSet> {
        let conv = |s: Option<CoeffSpec>| s.map(CoeffSpec::into_coefficient).unwrap_or_default();
        CoefficientSet::new(
            conv(self.a),
            conv(self.b),
            conv(self.c),
            conv(self.d),
            conv(self.f),
            conv(self.g),
            self.h0.unwrap_or(DEFAULT_H0),
        )
    }
}

/// Evaluates all coefficients and `a'`, `d'` at `t`.
pub fn eval_coeffs(set: &CoefficientSet, t: f64) -> Result<CoeffValues> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let checked = |name: &'static str, v: f64| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteCoefficient { name, t })
        }
    };
    Ok(CoeffValues {
        a: checked("a", set.a.value(t))?,
        b: checked("b", set.b.value(t))?,
        c: checked("c", set.c.value(t))?,
        d: checked("d", set.d.value(t))?,
        f: checked("f", set.f.value(t))?,
        g: checked("g", set.g.value(t))?,
        a_prime: checked("a'", set.a.derivative(t))?,
        d_prime: checked("d'", set.d.derivative(t))?,
    })
}

/// `τ = a'/a − 2c + 4d` and `σ = ab − cd + d² + d a'/(2a) − d'/2`.
pub fn tau_sigma(set: &CoefficientSet, t: f64) -> Result<(f64, f64)> {
    let v = eval_coeffs(set, t)?;
    tau_sigma_from(&v, t)
}

pub(crate) fn tau_sigma_from(v: &CoeffValues, t: f64) -> Result<(f64, f64)> {
    if v.a == 0.0 {
        return Err(Error::SingularCoefficient { t });
    }
    let tau = v.a_prime / v.a - 2.0 * v.c + 4.0 * v.d;
    let sigma = v.a * v.b - v.c * v.d + v.d * v.d + v.d * v.a_prime / (2.0 * v.a) - v.d_prime / 2.0;
    Ok((tau, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        let v = eval_coeffs(&CoefficientSet::free_particle(), 0.7).unwrap();
        assert_eq!((v.a, v.b, v.c, v.d, v.f, v.g), (1.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!((v.a_prime, v.d_prime), (0.0, 0.0));

        let v = eval_coeffs(&CoefficientSet::harmonic(2.0).unwrap(), 3.3).unwrap();
        assert_eq!((v.a, v.b, v.c, v.d), (1.0, 1.0, 0.0, 0.0));

        let v = eval_coeffs(&CoefficientSet::exponential(1.0).unwrap(), -0.4).unwrap();
        assert_eq!((v.a, v.b, v.c, v.d, v.f, v.g), (1.0, -1.0, 0.0, -1.0, 0.0, 0.0));
    }

    #[test]
    fn tau_sigma_presets() {
        let (tau, sigma) = tau_sigma(&CoefficientSet::harmonic(3.0).unwrap(), 0.2).unwrap();
        assert_eq!((tau, sigma), (0.0, 2.25));
        let (tau, sigma) = tau_sigma(&CoefficientSet::exponential(0.5).unwrap(), 1.0).unwrap();
        assert!((tau + 2.0).abs() < 1e-15 && sigma.abs() < 1e-15);
        assert_eq!(tau_sigma(&CoefficientSet::free_particle(), 9.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn sigma_with_zero_d_has_no_quotient() {
        let set = CoefficientSet::new(
            Coefficient::from_terms(vec![Term::Exp { coef: 1.0, r: 0.3 }]),
            Coefficient::constant(2.0),
            Coefficient::constant(0.7),
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::zero(),
            1.0,
        )
        .unwrap();
        let (tau, sigma) = tau_sigma(&set, 0.5).unwrap();
        let a = (0.15f64).exp();
        assert!((sigma - 2.0 * a).abs() < 1e-14);
        assert!((tau - (0.3 - 1.4)).abs() < 1e-14);
    }

    #[test]
    fn zero_a_is_rejected() {
        let err = CoefficientSet::new(
            Coefficient::from_terms(vec![Term::Sin { coef: 1.0, w: 1.0 }]),
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::zero(),
            Coefficient::zero(),
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularCoefficient { .. }));
        assert!(CoefficientSet::harmonic(0.0).is_err());
        assert!(CoefficientSet::plasma(0.0).is_err());
    }

    #[test]
    fn non_finite_value_names_the_coefficient() {
        let mut set = CoefficientSet::free_particle();
        set.g = Coefficient::from_fn(|t| 1.0 / (t - 1.0));
        match eval_coeffs(&set, 1.0) {
            Err(Error::NonFiniteCoefficient { name, .. }) => assert_eq!(name, "g"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_terms_and_defaults() {
        let set = CoefficientSet::from_json(
            r#"{"a": 1.0,
                "b": [{"kind": "cos", "coef": 0.25, "w": 2.0}, {"kind": "poly", "coef": 1.0, "n": 2}],
                "d": [{"kind": "exp", "coef": -0.5, "r": 1.0}],
                "h0": 3.0}"#,
        )
        .unwrap();
        let v = set.eval(0.5).unwrap();
        assert!((v.b - (0.25 * 1f64.cos() + 0.25)).abs() < 1e-15);
        assert!((v.d_prime + 0.5 * 0.5f64.exp()).abs() < 1e-15);
        assert_eq!(v.c, 0.0);
        assert_eq!(set.h0, 3.0);
        assert!(CoefficientSet::from_json(r#"{"b": 1.0}"#).is_err());
        assert!(CoefficientSet::from_json(r#"{"a": 1.0, "q": 2.0}"#).is_err());
    }

    #[test]
    fn closure_derivative_fallback() {
        let c = Coefficient::from_fn(|t| (2.0 * t).sin());
        assert!((c.derivative(0.3) - 2.0 * 0.6f64.cos()).abs() < 1e-8);
    }

    #[test]
    fn example3_driving_term() {
        let set = CoefficientSet::example3(0.25, 2.0, 0.5, 1.5).unwrap();
        let v = set.eval(1.0).unwrap();
        assert!((v.f + 1.5 * 8.0 / 8.0).abs() < 1e-15);
        let h = 1e-5;
        let fd = (set.f.value(1.0 + h) - set.f.value(1.0 - h)) / (2.0 * h);
        assert!((set.f.derivative(1.0) - fd).abs() < 1e-8);
    }
}
