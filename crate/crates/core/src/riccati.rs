//! The Riccati-type system
//!
//! ```text
//! α' + b + 2cα + 4aα² = 0        δ' + (c + 4aα)δ = f + 2αg
//! β' + (c + 4aα)β = 0            ε' = (g − 2aδ)β
//! γ' + aβ² = 0                   κ' = gδ − aδ²
//! ```
//!
//! together with `μ' = μ(4aα + 2d)`. Solutions are produced along two
//! independent paths: composition with the fundamental solution (path A) and
//! direct adaptive integration (path B). Closed forms exist for the free,
//! harmonic and linear-potential presets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::chareq::{BasisValues, CharacteristicBasis};
use crate::coeffs::{eval_coeffs, tau_sigma_from, CoefficientSet, Preset};
use crate::error::{Error, Result};
use crate::numerics::ode::{dopri5, DenseSolution, OdeOptions};
use crate::numerics::quad::{integrate, QuadOptions};
use crate::numerics::stencil;
use crate::verify::report::{
    EquationNorm, Method, Point, ResidualReport, Sampling, TimeSamples,
};

/// Below this time the fundamental solution is replaced by its small-time expansion.
pub const T_MIN: f64 = 1e-3;
/// Tolerance on `|α(0) + γ₀(t)|` below which a focal point is reported.
pub const FOCAL_TOL: f64 = 1e-12;
/// Step of the finite differences used by [`riccati_residual`].
pub const RESIDUAL_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiState {
    pub t: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub kappa: f64,
}

impl RiccatiState {
    /// Initial data at `t = 0`; rejects `μ = 0` and `β = 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn initial(
        mu: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        delta: f64,
        epsilon: f64,
        kappa: f64,
    ) -> Result<Self> {
        let s = Self {
            t: 0.0,
            mu,
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            kappa,
        };
        if !s.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("initial Riccati data must be finite".into()));
        }
        if mu == 0.0 || beta == 0.0 {
            return Err(Error::InvalidParameter("initial mu and beta must be nonzero".into()));
        }
        Ok(s)
    }

    /// `μ = β = 1`, everything else zero.
    pub fn identity() -> Self {
        Self {
            t: 0.0,
            mu: 1.0,
            alpha: 0.0,
            beta: 1.0,
            gamma: 0.0,
            delta: 0.0,
            epsilon: 0.0,
            kappa: 0.0,
        }
    }

    /// Components in the order `[μ, α, β, γ, δ, ε, κ]`.
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.mu,
            self.alpha,
            self.beta,
            self.gamma,
            self.delta,
            self.epsilon,
            self.kappa,
        ]
    }

    pub fn from_array(t: f64, v: &[f64]) -> Self {
        Self {
            t,
            mu: v[0],
            alpha: v[1],
            beta: v[2],
            gamma: v[3],
            delta: v[4],
            epsilon: v[5],
            kappa: v[6],
        }
    }

    /// Quadratic phase `αx² + δx + κ`.
    pub fn phase(&self, x: f64) -> f64 {
        (self.alpha * x + self.delta) * x + self.kappa
    }
}

pub const COMPONENT_NAMES: [&str; 7] = ["mu", "alpha", "beta", "gamma", "delta", "epsilon", "kappa"];

/// A solution of the Riccati-type system evaluable on a time interval.
pub trait Trajectory: Send + Sync {
    fn state(&self, t: f64) -> Result<RiccatiState>;

    fn coefficients(&self) -> &CoefficientSet;

    /// Interval on which [`Trajectory::state`] may be called.
    fn domain(&self) -> (f64, f64);

    fn initial(&self) -> RiccatiState {
        self.state(0.0).expect("trajectories are defined at t = 0")
    }

    /// Exact `μ'(t)` when the construction provides it.
    fn mu_prime(&self, _t: f64) -> Option<Result<f64>> {
        None
    }

    fn label(&self) -> String;
}

/// `λ(t) = exp(−∫₀ᵗ (c − 2d) ds)`; exact for term sums, adaptive quadrature otherwise.
pub fn lambda_factor(set: &CoefficientSet, t: f64) -> Result<f64> {
    if set.c.is_zero() && set.d.is_zero() {
        return Ok(1.0);
    }
    if let (Some(ic), Some(id)) = (set.c.exact_integral(t), set.d.exact_integral(t)) {
        return Ok((-(ic - 2.0 * id)).exp());
    }
    let r = integrate(
        |s| set.c.value(s) - 2.0 * set.d.value(s),
        0.0,
        t,
        &QuadOptions::absolute(1e-12),
    )?;
    Ok((-r.value).exp())
}

/// Values of the fundamental solution at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalValues {
    pub t: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub gamma0: f64,
    pub delta0: f64,
    pub epsilon0: f64,
    pub kappa0: f64,
    pub lambda: f64,
    pub basis: BasisValues,
    /// True when the small-time expansion was used.
    pub asymptotic: bool,
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 1000,
    }
}

/// Ingredients of the δ₀, ε₀, κ₀ quadratures.
struct Ingredients<'a> {
    set: &'a CoefficientSet,
    basis: &'a CharacteristicBasis,
}

impl Ingredients<'_> {
    fn forcing_is_zero(&self) -> bool {
        self.set.f.is_zero() && self.set.g.is_zero()
    }

    // f − d g / a
    fn p(&self, s: f64) -> Result<f64> {
        let v = eval_coeffs(self.set, s)?;
        Ok(v.f - v.d * v.g / v.a)
    }

    // ∫₀ᵗ [(f − dg/a) μ₀ + g μ₀'/(2a)] / λ ds, so that μ₀ δ₀ = λ J
    fn j(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let mut err = None;
        let r = integrate(
            |s| match self.j_integrand(s) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            t,
            &quad_opts(),
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(r?.value)
    }

    fn j_integrand(&self, s: f64) -> Result<f64> {
        let v = eval_coeffs(self.set, s)?;
        let b = self.basis.eval(s)?;
        let w = (v.f - v.d * v.g / v.a) * b.mu0 + v.g * b.mu0_prime / (2.0 * v.a);
        Ok(w / lambda_factor(self.set, s)?)
    }

    fn integral<F>(&self, t: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut err = None;
        let r = integrate(
            |s| match f(s) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            t,
            &quad_opts(),
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(r?.value)
    }

    /// `(δ₀, ε₀, κ₀)` from the quadrature formulas, valid for any `t > 0`
    /// before the first sign change of μ₀'.
    fn linear_terms(&self, t: f64, lambda: f64, b: &BasisValues) -> Result<(f64, f64, f64)> {
        let v = eval_coeffs(self.set, 0.0)?;
        if t == 0.0 {
            return Ok((v.g / (2.0 * v.a), -v.g / (2.0 * v.a), 0.0));
        }
        if self.forcing_is_zero() {
            return Ok((0.0, 0.0, 0.0));
        }
        if let Some(s) = self.basis.mu0_prime_sign_change(t)? {
            return Err(Error::SingularQuadrature { s });
        }
        let jt = self.j(t)?;
        let delta0 = lambda * jt / b.mu0;
        let vt = eval_coeffs(self.set, t)?;

        let e1 = self.integral(t, |s| {
            let v = eval_coeffs(self.set, s)?;
            let (_, sigma) = tau_sigma_from(&v, s)?;
            let bs = self.basis.eval(s)?;
            let lam = lambda_factor(self.set, s)?;
            // μ₀ δ₀ = λ J
            let m0d0 = lam * self.j(s)?;
            Ok(v.a * sigma * lam * m0d0 / (bs.mu0_prime * bs.mu0_prime))
        })?;
        let e2 = self.integral(t, |s| {
            let v = eval_coeffs(self.set, s)?;
            let bs = self.basis.eval(s)?;
            let lam = lambda_factor(self.set, s)?;
            Ok(v.a * lam * self.p(s)? / bs.mu0_prime)
        })?;
        let epsilon0 = -2.0 * vt.a * lambda * delta0 / b.mu0_prime + 8.0 * e1 + 2.0 * e2;

        let k1 = self.integral(t, |s| {
            let v = eval_coeffs(self.set, s)?;
            let (_, sigma) = tau_sigma_from(&v, s)?;
            let bs = self.basis.eval(s)?;
            let m0d0 = lambda_factor(self.set, s)? * self.j(s)?;
            Ok(v.a * sigma * m0d0 * m0d0 / (bs.mu0_prime * bs.mu0_prime))
        })?;
        let k2 = self.integral(t, |s| {
            let v = eval_coeffs(self.set, s)?;
            let bs = self.basis.eval(s)?;
            let m0d0 = lambda_factor(self.set, s)? * self.j(s)?;
            Ok(v.a * m0d0 * self.p(s)? / bs.mu0_prime)
        })?;
        let kappa0 = vt.a * lambda * jt * delta0 / b.mu0_prime - 4.0 * k1 - 2.0 * k2;
        Ok((delta0, epsilon0, kappa0))
    }
}

fn fundamental_direct(
    set: &CoefficientSet,
    basis: &CharacteristicBasis,
    t: f64,
) -> Result<FundamentalValues> {
    let b = basis.eval(t)?;
    if b.mu0 == 0.0 {
        return Err(Error::FocalTime { t });
    }
    let v = eval_coeffs(set, t)?;
    let v0 = eval_coeffs(set, 0.0)?;
    let lambda = lambda_factor(set, t)?;
    let ing = Ingredients { set, basis };
    let (delta0, epsilon0, kappa0) = ing.linear_terms(t, lambda, &b)?;
    Ok(FundamentalValues {
        t,
        alpha0: b.mu0_prime / (4.0 * v.a * b.mu0) - v.d / (2.0 * v.a),
        beta0: -lambda / b.mu0,
        gamma0: b.mu1 / (2.0 * b.mu0) + v0.d / (2.0 * v0.a),
        delta0,
        epsilon0,
        kappa0,
        lambda,
        basis: b,
        asymptotic: false,
    })
}

/// Fundamental solution at `t > 0`; the small-time expansion is used for `t < T_MIN`.
pub fn fundamental_solution(
    set: &CoefficientSet,
    basis: &CharacteristicBasis,
    t: f64,
) -> Result<FundamentalValues> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "the fundamental solution is singular at t = {t}; need t > 0"
        )));
    }
    if t >= T_MIN {
        return fundamental_direct(set, basis, t);
    }
    let v0 = eval_coeffs(set, 0.0)?;
    let (a, c, ap, g) = (v0.a, v0.c, v0.a_prime, v0.g);
    Ok(FundamentalValues {
        t,
        alpha0: 1.0 / (4.0 * a * t) - c / (4.0 * a) - ap / (8.0 * a * a),
        beta0: -1.0 / (2.0 * a * t) + ap / (4.0 * a * a),
        gamma0: 1.0 / (4.0 * a * t) + c / (4.0 * a) - ap / (8.0 * a * a),
        delta0: g / (2.0 * a),
        epsilon0: -g / (2.0 * a),
        kappa0: 0.0,
        lambda: lambda_factor(set, t)?,
        basis: basis.eval(t)?,
        asymptotic: true,
    })
}

fn check_init(init: &RiccatiState) -> Result<()> {
    RiccatiState::initial(
        init.mu,
        init.alpha,
        init.beta,
        init.gamma,
        init.delta,
        init.epsilon,
        init.kappa,
    )
    .map(|_| ())
}

/// General solution at `t` by composition with the fundamental solution (path A).
pub fn general_solution(
    set: &CoefficientSet,
    basis: &CharacteristicBasis,
    init: &RiccatiState,
    t: f64,
) -> Result<RiccatiState> {
    check_init(init)?;
    if t == 0.0 {
        return Ok(*init);
    }
    if t < 0.0 {
        return Err(Error::OutOfDomain {
            t,
            lo: 0.0,
            hi: basis.t_span().1,
        });
    }
    let q = |eps0: f64| init.delta + eps0;
    if t >= T_MIN {
        let fs = fundamental_direct(set, basis, t)?;
        let den = init.alpha + fs.gamma0;
        if den.abs() < FOCAL_TOL {
            return Err(Error::FocalPoint { t, denominator: den });
        }
        let qq = q(fs.epsilon0);
        return Ok(RiccatiState {
            t,
            mu: 2.0 * init.mu * fs.basis.mu0 * den,
            alpha: fs.alpha0 - fs.beta0 * fs.beta0 / (4.0 * den),
            beta: -init.beta * fs.beta0 / (2.0 * den),
            gamma: init.gamma - init.beta * init.beta / (4.0 * den),
            delta: fs.delta0 - fs.beta0 * qq / (2.0 * den),
            epsilon: init.epsilon - init.beta * qq / (2.0 * den),
            kappa: init.kappa + fs.kappa0 - qq * qq / (4.0 * den),
        });
    }
    // Near t = 0 the same formulas with the 1/μ₀ poles cleared.
    let fs = fundamental_direct(set, basis, t)?;
    let v = eval_coeffs(set, t)?;
    let v0 = eval_coeffs(set, 0.0)?;
    let b = fs.basis;
    let k = 2.0 * init.alpha + v0.d / v0.a;
    let m = init.mu * (k * b.mu0 + b.mu1);
    let mp = init.mu * (k * b.mu0_prime + b.mu1_prime);
    let den = m / (2.0 * init.mu * b.mu0);
    if den.abs() < FOCAL_TOL {
        return Err(Error::FocalPoint { t, denominator: den });
    }
    let qq = q(fs.epsilon0);
    let r = init.mu * b.mu0 / m;
    Ok(RiccatiState {
        t,
        mu: m,
        alpha: mp / (4.0 * v.a * m) - v.d / (2.0 * v.a),
        beta: init.beta * init.mu * fs.lambda / m,
        gamma: init.gamma - init.beta * init.beta * r / 2.0,
        delta: fs.delta0 + fs.lambda * init.mu * qq / m,
        epsilon: init.epsilon - init.beta * qq * r,
        kappa: init.kappa + fs.kappa0 - qq * qq * r / 2.0,
    })
}

/// Path A as a [`Trajectory`], with a small per-time cache.
pub struct CompositionTrajectory {
    set: CoefficientSet,
    basis: Arc<CharacteristicBasis>,
    init: RiccatiState,
    cache: Mutex<HashMap<u64, RiccatiState>>,
}

impl CompositionTrajectory {
    pub fn new(basis: Arc<CharacteristicBasis>, init: RiccatiState) -> Result<Self> {
        check_init(&init)?;
        Ok(Self {
            set: basis.coefficients().clone(),
            basis,
            init,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn basis(&self) -> &CharacteristicBasis {
        &self.basis
    }
}

impl Trajectory for CompositionTrajectory {
    fn state(&self, t: f64) -> Result<RiccatiState> {
        if let Some(s) = self.cache.lock().expect("cache lock").get(&t.to_bits()) {
            return Ok(*s);
        }
        let s = general_solution(&self.set, &self.basis, &self.init, t)?;
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() > 1 << 14 {
            cache.clear();
        }
        cache.insert(t.to_bits(), s);
        Ok(s)
    }

    fn coefficients(&self) -> &CoefficientSet {
        &self.set
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, self.basis.t_span().1)
    }

    fn initial(&self) -> RiccatiState {
        self.init
    }

    fn mu_prime(&self, t: f64) -> Option<Result<f64>> {
        let f = || -> Result<f64> {
            let v0 = eval_coeffs(&self.set, 0.0)?;
            let b = self.basis.eval(t)?;
            let k = 2.0 * self.init.alpha + v0.d / v0.a;
            Ok(self.init.mu * (k * b.mu0_prime + b.mu1_prime))
        };
        Some(f())
    }

    fn label(&self) -> String {
        let kind = if self.basis.is_exact() { "exact" } else { "integrated" };
        format!("composition ({kind} basis)")
    }
}

/// Path B: direct integration of the seven equations.
pub struct IntegratedTrajectory {
    set: CoefficientSet,
    init: RiccatiState,
    sol: DenseSolution,
}

fn riccati_rhs(set: &CoefficientSet, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let v = eval_coeffs(set, t)?;
    let (mu, al, be, de) = (y[0], y[1], y[2], y[4]);
    let damp = v.c + 4.0 * v.a * al;
    dy[0] = mu * (4.0 * v.a * al + 2.0 * v.d);
    dy[1] = -v.b - 2.0 * v.c * al - 4.0 * v.a * al * al;
    dy[2] = -damp * be;
    dy[3] = -v.a * be * be;
    dy[4] = -damp * de + v.f + 2.0 * al * v.g;
    dy[5] = (v.g - 2.0 * v.a * de) * be;
    dy[6] = v.g * de - v.a * de * de;
    Ok(())
}

/// Integrates the system from `init` on `[0, t_end]` (path B).
pub fn integrate_riccati(
    set: &CoefficientSet,
    init: &RiccatiState,
    t_end: f64,
    rtol: f64,
    atol: f64,
) -> Result<IntegratedTrajectory> {
    check_init(init)?;
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    let mut failure = None;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        if let Err(e) = riccati_rhs(set, t, y, dy) {
            failure.get_or_insert(e);
            dy.iter_mut().for_each(|d| *d = f64::NAN);
        }
    };
    let opts = OdeOptions {
        max_abs: 1e12,
        ..OdeOptions::with_tolerances(rtol, atol)
    };
    let sol = dopri5(rhs, 0.0, &init.as_array(), t_end, &opts);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(IntegratedTrajectory {
        set: set.clone(),
        init: *init,
        sol: sol?,
    })
}

impl Trajectory for IntegratedTrajectory {
    fn state(&self, t: f64) -> Result<RiccatiState> {
        if t == 0.0 {
            return Ok(self.init);
        }
        let mut y = [0.0; 7];
        self.sol.eval_into(t, &mut y)?;
        Ok(RiccatiState::from_array(t, &y))
    }

    fn coefficients(&self) -> &CoefficientSet {
        &self.set
    }

    fn domain(&self) -> (f64, f64) {
        self.sol.span()
    }

    fn initial(&self) -> RiccatiState {
        self.init
    }

    fn mu_prime(&self, t: f64) -> Option<Result<f64>> {
        let f = || -> Result<f64> {
            let s = self.state(t)?;
            let v = eval_coeffs(&self.set, t)?;
            Ok(s.mu * (4.0 * v.a * s.alpha + 2.0 * v.d))
        };
        Some(f())
    }

    fn label(&self) -> String {
        "direct integration".into()
    }
}

/// Closed-form general solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormKind {
    /// `a = 1`, `f = 2k` constant, everything else zero (`k = 0` is the free particle).
    LinearPotential { k: f64 },
    /// `a = 1`, `b = ω²/4`, everything else zero.
    Harmonic { omega: f64 },
}

pub struct ClosedFormTrajectory {
    set: CoefficientSet,
    kind: ClosedFormKind,
    init: RiccatiState,
}

impl ClosedFormTrajectory {
    /// Available for the free-particle, harmonic and plasma presets.
    pub fn new(set: &CoefficientSet, init: RiccatiState) -> Result<Self> {
        check_init(&init)?;
        let kind = match set.preset_kind() {
            Some(Preset::FreeParticle) => ClosedFormKind::LinearPotential { k: 0.0 },
            Some(Preset::Plasma { k }) => ClosedFormKind::LinearPotential { k },
            Some(Preset::Harmonic { omega }) => ClosedFormKind::Harmonic { omega },
            _ => {
                return Err(Error::Unsupported(
                    "closed-form Riccati solutions exist for free_particle, harmonic and plasma"
                        .into(),
                ))
            }
        };
        Ok(Self {
            set: set.clone(),
            kind,
            init,
        })
    }

    pub fn kind(&self) -> ClosedFormKind {
        self.kind
    }

    fn denominator(&self, t: f64) -> f64 {
        let i = &self.init;
        match self.kind {
            ClosedFormKind::LinearPotential { .. } => 1.0 + 4.0 * i.alpha * t,
            ClosedFormKind::Harmonic { omega } => {
                let (s, c) = (omega * t).sin_cos();
                (4.0 * i.alpha * s + omega * c) / omega
            }
        }
    }
}

impl Trajectory for ClosedFormTrajectory {
    fn state(&self, t: f64) -> Result<RiccatiState> {
        let i = &self.init;
        let l = self.denominator(t);
        if l.abs() < FOCAL_TOL {
            return Err(Error::FocalPoint { t, denominator: l });
        }
        Ok(match self.kind {
            ClosedFormKind::LinearPotential { k } => {
                let u = i.delta + k * t;
                RiccatiState {
                    t,
                    mu: i.mu * l,
                    alpha: i.alpha / l,
                    beta: i.beta / l,
                    gamma: i.gamma - i.beta * i.beta * t / l,
                    delta: k * t + u / l,
                    epsilon: i.epsilon - 2.0 * i.beta * t * u / l,
                    kappa: i.kappa - k * k * t.powi(3) / 3.0 - t * u * u / l,
                }
            }
            ClosedFormKind::Harmonic { omega } => {
                let (s, c) = (omega * t).sin_cos();
                let d = omega * l;
                RiccatiState {
                    t,
                    mu: i.mu * l,
                    alpha: omega / 4.0 * (4.0 * i.alpha * c - omega * s) / d,
                    beta: omega * i.beta / d,
                    gamma: i.gamma - i.beta * i.beta * s / d,
                    delta: omega * i.delta / d,
                    epsilon: i.epsilon - 2.0 * i.beta * i.delta * s / d,
                    kappa: i.kappa - i.delta * i.delta * s / d,
                }
            }
        })
    }

    fn coefficients(&self) -> &CoefficientSet {
        &self.set
    }

    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn initial(&self) -> RiccatiState {
        self.init
    }

    fn mu_prime(&self, t: f64) -> Option<Result<f64>> {
        let i = &self.init;
        Some(Ok(match self.kind {
            ClosedFormKind::LinearPotential { .. } => 4.0 * i.alpha * i.mu,
            ClosedFormKind::Harmonic { omega } => {
                let (s, c) = (omega * t).sin_cos();
                i.mu * (4.0 * i.alpha * c - omega * s)
            }
        }))
    }

    fn label(&self) -> String {
        match self.kind {
            ClosedFormKind::LinearPotential { k } if k == 0.0 => "closed form (free particle)".into(),
            ClosedFormKind::LinearPotential { .. } => "closed form (linear potential)".into(),
            ClosedFormKind::Harmonic { .. } => "closed form (harmonic)".into(),
        }
    }
}

/// States at the stencil points around `t` and the matching weights for d/dt.
fn stencil_states(
    traj: &dyn Trajectory,
    t: f64,
    h: f64,
) -> Result<(Vec<(f64, RiccatiState)>, f64)> {
    let (lo, hi) = traj.domain();
    let (weights, offsets, sign): (&[f64], Vec<f64>, f64) = if t - 2.0 * h < lo {
        (&stencil::FORWARD4_D1, (0..5).map(|k| k as f64).collect(), 1.0)
    } else if t + 2.0 * h > hi {
        (&stencil::FORWARD4_D1, (0..5).map(|k| -(k as f64)).collect(), -1.0)
    } else {
        (&stencil::CENTRAL4_D1, (-2..=2).map(|k| k as f64).collect(), 1.0)
    };
    let mut out = Vec::with_capacity(5);
    for (w, o) in weights.iter().zip(offsets) {
        out.push((*w, traj.state(t + o * h)?));
    }
    Ok((out, sign / h))
}

/// Residuals of the six equations along a trajectory, by 4th-order differences
/// in t with step [`RESIDUAL_STEP`].
pub fn riccati_residual(traj: &dyn Trajectory, t_grid: &[f64]) -> Result<ResidualReport> {
    let set = traj.coefficients();
    let mut per = [(0.0f64, 0.0f64); 6];
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let (pts, scale) = stencil_states(traj, t, RESIDUAL_STEP)?;
        let mut d = [0.0f64; 7];
        for (w, s) in &pts {
            for (dk, v) in d.iter_mut().zip(s.as_array()) {
                *dk += w * v;
            }
        }
        d.iter_mut().for_each(|x| *x *= scale);
        let s = traj.state(t)?;
        let v = eval_coeffs(set, t)?;
        let damp = v.c + 4.0 * v.a * s.alpha;
        let r = [
            d[1] + v.b + 2.0 * v.c * s.alpha + 4.0 * v.a * s.alpha * s.alpha,
            d[2] + damp * s.beta,
            d[3] + v.a * s.beta * s.beta,
            d[4] + damp * s.delta - v.f - 2.0 * s.alpha * v.g,
            d[5] - (v.g - 2.0 * v.a * s.delta) * s.beta,
            d[6] - v.g * s.delta + v.a * s.delta * s.delta,
        ];
        let mut worst = 0.0f64;
        for (k, rk) in r.iter().enumerate() {
            let a = rk.abs();
            if a > per[k].0 || a.is_nan() {
                per[k] = (a, t);
            }
            worst = worst.max(a);
            if a.is_nan() {
                worst = f64::NAN;
            }
        }
        samples.push((0.0, t, worst));
    }
    let ts = TimeSamples::of(t_grid);
    let weight = if t_grid.len() > 1 {
        (ts.t1 - ts.t0) / (t_grid.len() - 1) as f64
    } else {
        1.0
    };
    let mut report =
        ResidualReport::from_samples(&samples, weight, Method::Central4, Sampling::Times(ts));
    report.per_equation = per
        .iter()
        .zip(&COMPONENT_NAMES[1..])
        .map(|(&(sup, t), name)| EquationNorm {
            name: (*name).to_string(),
            sup_norm: sup,
            worst_point: Point { x: 0.0, t },
        })
        .collect();
    Ok(report)
}

/// Relative deviation used to compare two evaluations of the same component:
/// `|a − b| / max(|b|, 1)`.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// How a trajectory is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    /// Composition with the fundamental solution (path A).
    A,
    /// Direct integration of the system (path B).
    B,
    /// Closed form (free particle, harmonic, plasma).
    Closed,
}

/// Builds a trajectory on `[0, t_end]`. Without an explicit choice: closed form
/// when available, then path A over an exact characteristic basis, else path B.
pub fn build_trajectory(
    set: &CoefficientSet,
    init: RiccatiState,
    t_end: f64,
    path: Option<PathChoice>,
) -> Result<Arc<dyn Trajectory>> {
    let closed = matches!(
        set.preset_kind(),
        Some(Preset::FreeParticle | Preset::Harmonic { .. } | Preset::Plasma { .. })
    );
    let exact = CharacteristicBasis::exact(set);
    let path = path.unwrap_or(if closed {
        PathChoice::Closed
    } else if exact.is_some() {
        PathChoice::A
    } else {
        PathChoice::B
    });
    Ok(match path {
        PathChoice::Closed => Arc::new(ClosedFormTrajectory::new(set, init)?),
        PathChoice::A => {
            let basis = match exact {
                Some(b) => b,
                None => crate::chareq::solve_characteristic(
                    set,
                    t_end,
                    crate::chareq::DEFAULT_RTOL,
                    crate::chareq::DEFAULT_ATOL,
                )?,
            };
            Arc::new(CompositionTrajectory::new(Arc::new(basis), init)?)
        }
        PathChoice::B => Arc::new(integrate_riccati(set, &init, t_end, 1e-11, 1e-13)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chareq::{solve_characteristic, DEFAULT_ATOL, DEFAULT_RTOL};
    use std::f64::consts::{FRAC_PI_4, SQRT_2};

    fn ts(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_factor(&CoefficientSet::harmonic(2.0).unwrap(), 0.7).unwrap(), 1.0);
        assert_eq!(lambda_factor(&CoefficientSet::plasma(0.5).unwrap(), 0.7).unwrap(), 1.0);
        let l = lambda_factor(&CoefficientSet::exponential(0.5).unwrap(), 0.8).unwrap();
        assert!((l - (-0.8f64).exp()).abs() < 1e-15);
        let mut set = CoefficientSet::free_particle();
        set.c = crate::coeffs::Coefficient::from_fn(|s| s.cos());
        let l = lambda_factor(&set, 1.2).unwrap();
        assert!((l - (-(1.2f64).sin()).exp()).abs() < 1e-12);
    }

    #[test]
    fn fundamental_free_particle() {
        let set = CoefficientSet::free_particle();
        let basis = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let f = fundamental_solution(&set, &basis, 0.5).unwrap();
        assert!((f.alpha0 - 0.5).abs() < 1e-12);
        assert!((f.beta0 + 1.0).abs() < 1e-12);
        assert!((f.gamma0 - 0.5).abs() < 1e-12);
        assert_eq!((f.delta0, f.epsilon0, f.kappa0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn fundamental_harmonic_quarter_period() {
        let set = CoefficientSet::harmonic(1.0).unwrap();
        let basis = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let f = fundamental_solution(&set, &basis, FRAC_PI_4).unwrap();
        assert!((f.alpha0 - 0.25).abs() < 1e-9);
        assert!((f.gamma0 - 0.25).abs() < 1e-9);
        assert!((f.beta0 + SQRT_2 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn fundamental_plasma_linear_terms() {
        let k = 0.7;
        let set = CoefficientSet::plasma(k).unwrap();
        let basis = CharacteristicBasis::exact(&set).unwrap();
        let t = 0.9;
        let f = fundamental_solution(&set, &basis, t).unwrap();
        assert!((f.delta0 - k * t).abs() < 1e-12);
        assert!((f.epsilon0 - k * t).abs() < 1e-12);
        assert!((f.kappa0 + k * k * t.powi(3) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn small_time_expansion() {
        for set in [
            CoefficientSet::free_particle(),
            CoefficientSet::harmonic(2.0).unwrap(),
            CoefficientSet::exponential(1.0).unwrap(),
        ] {
            let basis = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
            for &t in &[1e-4, 1e-3] {
                let f = fundamental_solution(&set, &basis, t).unwrap();
                assert_eq!(f.asymptotic, t < T_MIN);
                assert!((4.0 * t * f.alpha0 - 1.0).abs() < 1e-2);
                assert!((-2.0 * t * f.beta0 - 1.0).abs() < 1e-2);
                assert!((4.0 * t * f.gamma0 - 1.0).abs() < 1e-2);
            }
        }
        assert!(fundamental_solution(&CoefficientSet::free_particle(), &CharacteristicBasis::exact(&CoefficientSet::free_particle()).unwrap(), 0.0).is_err());
    }

    #[test]
    fn general_solution_examples() {
        let init = RiccatiState::identity();
        let set = CoefficientSet::free_particle();
        let basis = solve_characteristic(&set, 2.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let s = general_solution(&set, &basis, &init, 1.5).unwrap();
        assert!((s.gamma + 1.5).abs() < 1e-10 && (s.mu - 1.0).abs() < 1e-10);
        assert!(s.alpha.abs() < 1e-10 && (s.beta - 1.0).abs() < 1e-10);

        let omega = 1.3;
        let set = CoefficientSet::harmonic(omega).unwrap();
        let basis = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let t = 0.8;
        let s = general_solution(&set, &basis, &init, t).unwrap();
        let wt = omega * t;
        assert!((s.alpha + omega / 4.0 * wt.tan()).abs() < 1e-8);
        assert!((s.beta - 1.0 / wt.cos()).abs() < 1e-8);
        assert!((s.gamma + wt.tan() / omega).abs() < 1e-8);
        assert!((s.mu - wt.cos()).abs() < 1e-8);

        let k = 0.5;
        let set = CoefficientSet::plasma(k).unwrap();
        let basis = solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let s = general_solution(&set, &basis, &init, t).unwrap();
        assert!((s.delta - 2.0 * k * t).abs() < 1e-8);
        assert!((s.epsilon + 2.0 * k * t * t).abs() < 1e-8);
        assert!((s.kappa + 4.0 * k * k * t.powi(3) / 3.0).abs() < 1e-8);
        assert!((s.gamma + t).abs() < 1e-8);
    }

    #[test]
    fn focal_point_is_refused() {
        let set = CoefficientSet::harmonic(1.0).unwrap();
        let basis = CharacteristicBasis::exact(&set).unwrap();
        let t = std::f64::consts::FRAC_PI_2;
        let err = general_solution(&set, &basis, &RiccatiState::identity(), t).unwrap_err();
        assert!(matches!(err, Error::FocalPoint { .. }), "{err}");
        let cf = ClosedFormTrajectory::new(&set, RiccatiState::identity()).unwrap();
        assert!(matches!(cf.state(t), Err(Error::FocalPoint { .. })));
    }

    #[test]
    fn paths_agree_with_forcing() {
        // g ≠ 0 and time-dependent coefficients exercise every quadrature
        let c = |v: f64| crate::coeffs::Coefficient::constant(v);
        use crate::coeffs::{Coefficient, Term};
        let set = CoefficientSet::new(
            Coefficient::from_terms(vec![Term::Poly { coef: 1.0, n: 0 }, Term::Poly { coef: 0.2, n: 1 }]),
            c(0.3),
            c(0.1),
            Coefficient::from_terms(vec![Term::Cos { coef: 0.05, w: 1.0 }]),
            c(0.4),
            c(0.3),
            1.0,
        )
        .unwrap();
        let init = RiccatiState::initial(1.0, 0.1, 1.0, 0.0, 0.2, 0.1, 0.0).unwrap();
        let basis = Arc::new(solve_characteristic(&set, 1.0, 1e-11, 1e-13).unwrap());
        let a = CompositionTrajectory::new(basis, init).unwrap();
        let b = integrate_riccati(&set, &init, 1.0, 1e-11, 1e-13).unwrap();
        for t in [1e-5, 5e-4, 2e-3, 0.1, 0.5, 1.0] {
            let (sa, sb) = (a.state(t).unwrap(), b.state(t).unwrap());
            for (x, y) in sa.as_array().iter().zip(sb.as_array()) {
                assert!(relative_gap(*x, y) < 1e-7, "t = {t}: {sa:?} vs {sb:?}");
            }
        }
    }

    #[test]
    fn closed_forms_solve_the_system() {
        let init = RiccatiState::initial(1.5, 0.2, 0.8, 0.1, -0.3, 0.4, 0.05).unwrap();
        let h = CoefficientSet::harmonic(1.0).unwrap();
        let cf = ClosedFormTrajectory::new(&h, init).unwrap();
        assert!(riccati_residual(&cf, &ts(0.05, 1.2, 40)).unwrap().sup_norm < 1e-7);
        let p = CoefficientSet::plasma(0.5).unwrap();
        let cf = ClosedFormTrajectory::new(&p, init).unwrap();
        assert!(riccati_residual(&cf, &ts(0.0, 1.0, 40)).unwrap().sup_norm < 1e-7);
        assert!(ClosedFormTrajectory::new(&CoefficientSet::exponential(1.0).unwrap(), init).is_err());
    }

    struct Corrupted<T: Trajectory>(T);
    impl<T: Trajectory> Trajectory for Corrupted<T> {
        fn state(&self, t: f64) -> Result<RiccatiState> {
            let mut s = self.0.state(t)?;
            s.kappa *= 1.01;
            Ok(s)
        }
        fn coefficients(&self) -> &CoefficientSet {
            self.0.coefficients()
        }
        fn domain(&self) -> (f64, f64) {
            self.0.domain()
        }
        fn label(&self) -> String {
            "corrupted".into()
        }
    }

    #[test]
    fn corrupted_kappa_is_detected() {
        let p = CoefficientSet::plasma(0.5).unwrap();
        let cf = ClosedFormTrajectory::new(&p, RiccatiState::identity()).unwrap();
        let r = riccati_residual(&Corrupted(cf), &ts(0.0, 1.0, 21)).unwrap();
        let kappa = r.per_equation.iter().find(|e| e.name == "kappa").unwrap();
        assert!(kappa.sup_norm > 1e-3);
        let beta = r.per_equation.iter().find(|e| e.name == "beta").unwrap();
        assert!(beta.sup_norm < 1e-7);
    }

    #[test]
    fn singular_quadrature_reported() {
        let mut set = CoefficientSet::harmonic(1.0).unwrap();
        set.f = crate::coeffs::Coefficient::constant(1.0);
        let basis = solve_characteristic(&set, 3.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap();
        let init = RiccatiState::initial(1.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let err = general_solution(&set, &basis, &init, 2.0).unwrap_err();
        assert!(matches!(err, Error::SingularQuadrature { .. }), "{err}");
        // the focal point of this data is at t = π − atan(1/2), so path B reaches t = 2
        let b = integrate_riccati(&set, &init, 2.5, 1e-10, 1e-12).unwrap();
        assert!(b.state(2.0).is_ok());
    }
}
