//! The gauge, scaling and coordinate change between the nonautonomous equation
//!
//! ```text
//! iψ_t = −aψ_xx + bx²ψ − icxψ_x − idψ − fxψ + igψ_x + h(t)|ψ|²ψ
//! ```
//!
//! and the autonomous `iχ_τ + h₀|χ|²χ = χ_ξξ`, together with the propagators of
//! the linear problem.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chareq::CharacteristicBasis;
use crate::coeffs::{eval_coeffs, CoefficientSet};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Field};
use crate::numerics::find_root;
use crate::numerics::quad::{integrate_panels, QuadOptions};
use crate::riccati::{
    build_trajectory, fundamental_solution, lambda_factor, ClosedFormTrajectory, FundamentalValues,
    RiccatiState, Trajectory,
};
use crate::scattering::Branch;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which form of the substitution a frame applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `ψ = μ^{−1/2} e^{iS} χ(βx + ε, γ)`.
    Lemma1,
    /// `ψ = (h₀μ)^{−1/2} e^{iS} Ψ((βx + ε)/√2, −γ/2)` onto the standard NLS.
    Civp,
}

/// A Riccati trajectory together with the nonlinearity constant and the form
/// of the substitution.
#[derive(Clone)]
pub struct TransformFrame {
    trajectory: Arc<dyn Trajectory>,
    h0: f64,
    normalization: Normalization,
    mu_sign: f64,
}

impl std::fmt::Debug for TransformFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformFrame")
            .field("trajectory", &self.trajectory.label())
            .field("h0", &self.h0)
            .field("normalization", &self.normalization)
            .finish()
    }
}

impl TransformFrame {
    pub fn new(trajectory: Arc<dyn Trajectory>, h0: f64, normalization: Normalization) -> Result<Self> {
        if !h0.is_finite() {
            return Err(Error::InvalidParameter(format!("h0 must be finite, got {h0}")));
        }
        if normalization == Normalization::Civp && h0 == 0.0 {
            return Err(Error::Normalization {
                t: 0.0,
                reason: "the standard-form scaling needs h0 != 0".into(),
            });
        }
        let mu0 = trajectory.initial().mu;
        Ok(Self {
            trajectory,
            h0,
            normalization,
            mu_sign: mu0.signum(),
        })
    }

    /// Free-particle frame with identity data: `ψ(x, t) = χ(x, −t)`.
    pub fn free_identity(h0: f64) -> Result<Self> {
        let set = CoefficientSet::free_particle().with_h0(h0);
        Self::closed_form(&set, RiccatiState::identity(), Normalization::Lemma1)
    }

    /// Harmonic frame with `μ(0) = β(0) = 1` and the other initial values zero.
    pub fn clark_wint(omega: f64, h0: f64) -> Result<Self> {
        let set = CoefficientSet::harmonic(omega)?.with_h0(h0);
        Self::closed_form(&set, RiccatiState::identity(), Normalization::Lemma1)
    }

    /// Linear-potential frame with identity data, the Tappert substitution.
    pub fn tappert(k: f64, h0: f64) -> Result<Self> {
        let set = CoefficientSet::plasma(k)?.with_h0(h0);
        Self::closed_form(&set, RiccatiState::identity(), Normalization::Lemma1)
    }

    pub fn closed_form(set: &CoefficientSet, init: RiccatiState, normalization: Normalization) -> Result<Self> {
        let traj = ClosedFormTrajectory::new(set, init)?;
        Self::new(Arc::new(traj), set.h0, normalization)
    }

    /// Picks the most accurate construction available for `set`: closed form,
    /// then composition over an exact characteristic basis, then direct
    /// integration on `[0, t_end]`.
    pub fn for_coefficients(
        set: &CoefficientSet,
        init: RiccatiState,
        t_end: f64,
        normalization: Normalization,
    ) -> Result<Self> {
        Self::new(build_trajectory(set, init, t_end, None)?, set.h0, normalization)
    }

    pub fn trajectory(&self) -> &Arc<dyn Trajectory> {
        &self.trajectory
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        self.trajectory.coefficients()
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Focusing when `h₀ < 0`: `Ψ = √|h₀| χ(√2X, −2T)` then solves
    /// `iΨ_T + Ψ_XX + 2|Ψ|²Ψ = 0`.
    pub fn branch(&self) -> Branch {
        if self.h0 < 0.0 {
            Branch::Focusing
        } else {
            Branch::Defocusing
        }
    }

    pub fn state(&self, t: f64) -> Result<RiccatiState> {
        self.trajectory.state(t)
    }

    pub fn time_domain(&self) -> (f64, f64) {
        self.trajectory.domain()
    }

    /// `h(t) = h₀ a β² |μ|`.
    pub fn coupling(&self, t: f64) -> Result<f64> {
        integrability_coupling(self, t)
    }

    /// The second form of the coupling, `h₀ β(0)² μ(0)² a λ² / |μ|`.
    pub fn coupling_from_lambda(&self, t: f64) -> Result<f64> {
        let s = self.state(t)?;
        let i = self.trajectory.initial();
        let set = self.coefficients();
        let a = eval_coeffs(set, t)?.a;
        let lam = lambda_factor(set, t)?;
        Ok(self.h0 * i.beta * i.beta * i.mu * i.mu * a * lam * lam / s.mu.abs())
    }

    /// Prefactor `|μ|^{−1/2}` or `|h₀μ|^{−1/2}`; μ must keep the sign it has at t = 0.
    fn amplitude(&self, s: &RiccatiState) -> Result<f64> {
        if s.mu == 0.0 || s.mu.signum() != self.mu_sign || !s.mu.is_finite() {
            return Err(Error::Normalization {
                t: s.t,
                reason: format!("mu = {} changed sign or vanished", s.mu),
            });
        }
        let m = match self.normalization {
            Normalization::Lemma1 => s.mu.abs(),
            Normalization::Civp => (self.h0 * s.mu).abs(),
        };
        Ok(m.powf(-0.5))
    }

    /// Autonomous coordinates of `(x, t)`: `(ξ, τ)` or `(X, T)` by normalization.
    pub fn coordinates(&self, s: &RiccatiState, x: f64) -> (f64, f64) {
        let xi = s.beta * x + s.epsilon;
        match self.normalization {
            Normalization::Lemma1 => (xi, s.gamma),
            Normalization::Civp => (xi / SQRT_2, -s.gamma / 2.0),
        }
    }
}

/// `h(t) = h₀ a(t) β(t)² |μ(t)|`, the coupling for which the frame maps solutions.
pub fn integrability_coupling(frame: &TransformFrame, t: f64) -> Result<f64> {
    let s = frame.state(t)?;
    let a = eval_coeffs(frame.coefficients(), t)?.a;
    Ok(frame.h0 * a * s.beta * s.beta * s.mu.abs())
}

/// `ψ` built from an autonomous solution through a frame.
pub struct LiftedField {
    chi: ComplexField,
    frame: TransformFrame,
}

impl LiftedField {
    pub fn frame(&self) -> &TransformFrame {
        &self.frame
    }
}

impl Field for LiftedField {
    fn value(&self, x: f64, t: f64) -> Result<Complex64> {
        let s = self.frame.state(t)?;
        let amp = self.frame.amplitude(&s)?;
        let (u, v) = self.frame.coordinates(&s, x);
        let chi = self.chi.value(u, v)?;
        let out = amp * Complex64::from_polar(1.0, s.phase(x)) * chi;
        if out.is_finite() {
            Ok(out)
        } else {
            Err(Error::NonFiniteField { x, t })
        }
    }

    fn time_domain(&self) -> (f64, f64) {
        self.frame.time_domain()
    }
}

/// Lifts an autonomous solution `χ(ξ, τ)` (or `Ψ(X, T)` in civp mode) to `ψ(x, t)`.
pub fn lift_solution(chi: ComplexField, frame: &TransformFrame) -> LiftedField {
    LiftedField {
        chi,
        frame: frame.clone(),
    }
}

/// `χ` recovered from a field `ψ(x, t)` on a time chart where γ is monotone.
pub struct PulledBackField {
    psi: ComplexField,
    frame: TransformFrame,
    chart: (f64, f64),
    gamma_range: (f64, f64),
}

impl PulledBackField {
    /// Time with `γ(t) = τ`, found by bracketed root finding on the chart.
    pub fn time_of(&self, tau: f64) -> Result<f64> {
        let (lo, hi) = self.gamma_range;
        if !(tau >= lo && tau <= hi) {
            return Err(Error::OutOfChart { tau, lo, hi });
        }
        let (t0, t1) = self.chart;
        find_root(|t| Ok(self.frame.state(t)?.gamma - tau), t0, t1)
    }
}

impl Field for PulledBackField {
    fn value(&self, u: f64, v: f64) -> Result<Complex64> {
        let (xi, tau) = match self.frame.normalization {
            Normalization::Lemma1 => (u, v),
            Normalization::Civp => (u * SQRT_2, -2.0 * v),
        };
        let t = self.time_of(tau)?;
        let s = self.frame.state(t)?;
        let x = (xi - s.epsilon) / s.beta;
        let amp = self.frame.amplitude(&s)?;
        let psi = self.psi.value(x, t)?;
        Ok(psi * Complex64::from_polar(1.0 / amp, -s.phase(x)))
    }

    fn time_domain(&self) -> (f64, f64) {
        let (lo, hi) = self.gamma_range;
        match self.frame.normalization {
            Normalization::Lemma1 => (lo, hi),
            Normalization::Civp => (-hi / 2.0, -lo / 2.0),
        }
    }
}

/// Inverse of [`lift_solution`] on the time chart `[t_lo, t_hi]`.
pub fn pull_back(psi: ComplexField, frame: &TransformFrame, chart: (f64, f64)) -> Result<PulledBackField> {
    let (t0, t1) = chart;
    if !(t1 > t0) {
        return Err(Error::InvalidParameter(format!("empty chart [{t0}, {t1}]")));
    }
    let (g0, g1) = (frame.state(t0)?.gamma, frame.state(t1)?.gamma);
    Ok(PulledBackField {
        psi,
        frame: frame.clone(),
        chart,
        gamma_range: (g0.min(g1), g0.max(g1)),
    })
}

/// Green's function of the linear problem built from the characteristic basis.
#[derive(Clone)]
pub struct GreenFunction {
    basis: Arc<CharacteristicBasis>,
}

/// The kernel frozen at one time.
#[derive(Debug, Clone, Copy)]
pub struct GreenKernel {
    pub fundamental: FundamentalValues,
    pub prefactor: Complex64,
    pub caustics: usize,
}

impl GreenKernel {
    pub fn phase(&self, x: f64, y: f64) -> f64 {
        let f = &self.fundamental;
        f.alpha0 * x * x + f.beta0 * x * y + f.gamma0 * y * y + f.delta0 * x + f.epsilon0 * y + f.kappa0
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.prefactor * Complex64::from_polar(1.0, self.phase(x, y))
    }
}

impl GreenFunction {
    pub fn new(basis: Arc<CharacteristicBasis>) -> Self {
        Self { basis }
    }

    pub fn basis(&self) -> &CharacteristicBasis {
        &self.basis
    }

    /// `(2πiμ₀)^{−1/2}`, continued past zeros of μ₀ with `e^{−iπ/2}` per zero.
    pub fn kernel_at(&self, t: f64) -> Result<GreenKernel> {
        let set = self.basis.coefficients();
        let fundamental = fundamental_solution(set, &self.basis, t)?;
        let mu0 = fundamental.basis.mu0;
        if mu0.abs() < 1e-13 {
            return Err(Error::FocalTime { t });
        }
        let caustics = self.basis.mu0_zero_count(t)?;
        // μ₀ = |μ₀| e^{iπn} with n the number of zeros already crossed
        let arg = -FRAC_PI_4 - FRAC_PI_2 * caustics as f64;
        let prefactor = Complex64::from_polar((2.0 * PI * mu0.abs()).powf(-0.5), arg);
        Ok(GreenKernel {
            fundamental,
            prefactor,
            caustics,
        })
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<Complex64> {
        Ok(self.kernel_at(t)?.eval(x, y))
    }
}

/// `G(x, y, t) = (2πiμ₀)^{−1/2} exp i(α₀x² + β₀xy + γ₀y² + δ₀x + ε₀y + κ₀)`.
pub fn green_function(basis: &Arc<CharacteristicBasis>, x: f64, y: f64, t: f64) -> Result<Complex64> {
    GreenFunction::new(basis.clone()).eval(x, y, t)
}

/// Free kernel of `iχ_τ = χ_ξξ`: `(−4πiΔτ)^{−1/2} exp(−i(ξ − η)²/(4Δτ))`.
pub fn free_kernel(xi: f64, eta: f64, dtau: f64) -> Result<Complex64> {
    if dtau == 0.0 || !dtau.is_finite() {
        return Err(Error::DegenerateKernel { t: dtau });
    }
    let pre = (Complex64::new(0.0, -4.0 * PI * dtau)).sqrt().inv();
    Ok(pre * Complex64::from_polar(1.0, -(xi - eta).powi(2) / (4.0 * dtau)))
}

/// The free kernel carried through a frame (`Lemma1` normalization):
/// `|μ(t)|^{−1/2} e^{iS(x,t)} G_free(βx + ε, β(0)y + ε(0), γ(t) − γ(0)) |β(0)| |μ(0)|^{1/2} e^{−iS(y,0)}`.
pub fn lift_free_propagator(frame: &TransformFrame, x: f64, y: f64, t: f64) -> Result<Complex64> {
    let s = frame.state(t)?;
    let s0 = frame.trajectory.initial();
    let dtau = s.gamma - s0.gamma;
    if dtau == 0.0 {
        return Err(Error::DegenerateKernel { t });
    }
    let g = free_kernel(s.beta * x + s.epsilon, s0.beta * y + s0.epsilon, dtau)?;
    let amp = (s0.mu / s.mu).abs().sqrt() * s0.beta.abs();
    Ok(g * Complex64::from_polar(amp, s.phase(x) - s0.phase(y)))
}

/// Result of the superposition integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagated {
    pub value: Complex64,
    /// `max(|φ(−W)|, |φ(W)|)`.
    pub boundary_magnitude: f64,
    pub quadrature_error: f64,
}

impl Propagated {
    /// True when the initial data has not decayed below 1e-12 at the window edges.
    pub fn truncated(&self) -> bool {
        self.boundary_magnitude >= 1e-12
    }
}

/// `ψ(x, t) = ∫ G(x, y, t) φ(y) dy` over `[−window, window]`.
///
/// Panels are cut so the kernel phase changes by at most π on each, then
/// refined adaptively to an absolute tolerance of 1e-9.
pub fn propagate_linear(
    green: &GreenFunction,
    phi: &dyn Fn(f64) -> Complex64,
    x: f64,
    t: f64,
    window: f64,
) -> Result<Propagated> {
    if !(window > 0.0) || !window.is_finite() {
        return Err(Error::InvalidParameter(format!("window must be positive, got {window}")));
    }
    let kernel = green.kernel_at(t)?;
    let boundary_magnitude = phi(-window).norm().max(phi(window).norm());
    if boundary_magnitude >= 1e-12 {
        log::warn!(
            "initial data is {boundary_magnitude:.3e} at the window edge ±{window}; the integral is truncated"
        );
    }
    let f = &kernel.fundamental;
    let slope = |y: f64| (f.beta0 * x + 2.0 * f.gamma0 * y + f.epsilon0).abs();
    let mut points = vec![-window];
    let mut y = -window;
    while y < window {
        let mut w = (window - y).min(1.0);
        while w * slope(y).max(slope(y + w)) > PI && w > 1e-6 {
            w *= 0.5;
        }
        y = if window - (y + w) < 1e-9 { window } else { y + w };
        points.push(y);
    }
    let opts = QuadOptions {
        abs_tol: 1e-9,
        rel_tol: 0.0,
        max_intervals: 20 * points.len() + 2000,
    };
    let r = integrate_panels(|y| kernel.eval(x, y) * phi(y), &points, &opts)?;
    Ok(Propagated {
        value: r.value,
        boundary_magnitude,
        quadrature_error: r.error,
    })
}

impl TransformFrame {
    /// `e^{iS(x,t)}` times the amplitude prefactor, exposed for diagnostics.
    pub fn gauge_factor(&self, x: f64, t: f64) -> Result<Complex64> {
        let s = self.state(t)?;
        Ok(self.amplitude(&s)? * (I * s.phase(x)).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chareq::{solve_characteristic, DEFAULT_ATOL, DEFAULT_RTOL};
    use crate::field::from_fn;
    use crate::riccati::CompositionTrajectory;

    fn gaussian() -> ComplexField {
        from_fn(|x, t| Complex64::new((-x * x).exp(), 0.3 * t) * Complex64::from_polar(1.0, 0.7 * x))
    }

    #[test]
    fn coupling_examples() {
        let omega = 1.3;
        let f = TransformFrame::clark_wint(omega, -2.0).unwrap();
        for t in [0.0, 0.4, 1.0] {
            let h = f.coupling(t).unwrap();
            assert!((h + 2.0 / (omega * t).cos()).abs() < 1e-12);
            assert!((h - f.coupling_from_lambda(t).unwrap()).abs() < 1e-10 * h.abs());
        }
        let f = TransformFrame::tappert(0.5, -2.0).unwrap();
        assert_eq!(f.coupling(0.8).unwrap(), -2.0);
        let f = TransformFrame::free_identity(0.7).unwrap();
        assert_eq!(f.coupling(3.0).unwrap(), 0.7);
    }

    #[test]
    fn coupling_forms_agree_on_integrated_frames() {
        let set = CoefficientSet::exponential(0.5).unwrap();
        let init = RiccatiState::initial(1.2, 0.1, 0.9, 0.0, 0.2, 0.0, 0.0).unwrap();
        let f = TransformFrame::for_coefficients(&set, init, 1.0, Normalization::Lemma1).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let (h1, h2) = (f.coupling(t).unwrap(), f.coupling_from_lambda(t).unwrap());
            assert!((h1 - h2).abs() <= 1e-10 * h1.abs(), "{h1} vs {h2}");
        }
    }

    #[test]
    fn lift_examples() {
        let chi = gaussian();
        let f = TransformFrame::free_identity(-2.0).unwrap();
        let psi = lift_solution(chi.clone(), &f);
        for (x, t) in [(0.3, 0.2), (-1.0, 0.9)] {
            assert!((psi.value(x, t).unwrap() - chi.value(x, -t).unwrap()).norm() < 1e-15);
        }

        let omega = 1.0;
        let f = TransformFrame::clark_wint(omega, -2.0).unwrap();
        let psi = lift_solution(chi.clone(), &f);
        for (x, t) in [(0.3, 0.2), (-1.0, 0.9)] {
            let c = (omega * t).cos();
            let want = c.powf(-0.5)
                * Complex64::from_polar(1.0, -omega / 4.0 * x * x * (omega * t).tan())
                * chi.value(x / c, -(omega * t).tan() / omega).unwrap();
            assert!((psi.value(x, t).unwrap() - want).norm() < 1e-13);
        }

        let k = 0.5;
        let f = TransformFrame::tappert(k, -2.0).unwrap();
        let psi = lift_solution(chi.clone(), &f);
        for (x, t) in [(0.3, 0.2), (-1.0, 0.9)] {
            let want = Complex64::from_polar(1.0, 2.0 * k * t * x - 4.0 * k * k * t.powi(3) / 3.0)
                * chi.value(x - 2.0 * k * t * t, -t).unwrap();
            assert!((psi.value(x, t).unwrap() - want).norm() < 1e-14);
        }
    }

    #[test]
    fn civp_preserves_initial_data() {
        let set = CoefficientSet::harmonic(1.0).unwrap().with_h0(1.0);
        let init = RiccatiState::initial(1.0, 0.0, SQRT_2, 0.0, 0.0, 0.0, 0.0).unwrap();
        let f = TransformFrame::closed_form(&set, init, Normalization::Civp).unwrap();
        let big_psi = gaussian();
        let psi = lift_solution(big_psi.clone(), &f);
        for x in [-2.0, 0.0, 0.7] {
            assert!((psi.value(x, 0.0).unwrap() - big_psi.value(x, 0.0).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn normalization_guard() {
        // μ = cos t vanishes at π/2
        let f = TransformFrame::clark_wint(1.0, -2.0).unwrap();
        let psi = lift_solution(gaussian(), &f);
        assert!(matches!(psi.value(0.0, 2.0), Err(Error::Normalization { .. })));
        let set = CoefficientSet::free_particle().with_h0(0.0);
        assert!(TransformFrame::closed_form(&set, RiccatiState::identity(), Normalization::Civp).is_err());
    }

    #[test]
    fn pull_back_round_trips() {
        let chi = gaussian();
        let f = TransformFrame::clark_wint(1.0, -2.0).unwrap();
        let psi: ComplexField = Arc::new(lift_solution(chi.clone(), &f));
        let back = pull_back(psi, &f, (0.0, 1.2)).unwrap();
        for (xi, tau) in [(0.2, -0.3), (-1.5, -2.0), (0.0, 0.0)] {
            let d = back.value(xi, tau).unwrap() - chi.value(xi, tau).unwrap();
            assert!(d.norm() < 1e-12, "{d}");
        }
        assert!(matches!(back.value(0.0, 1.0), Err(Error::OutOfChart { .. })));

        let g = gaussian();
        let free = TransformFrame::free_identity(-2.0).unwrap();
        let back = pull_back(g.clone(), &free, (0.0, 5.0)).unwrap();
        let d = back.value(0.4, -1.5).unwrap() - g.value(0.4, 1.5).unwrap();
        assert!(d.norm() < 1e-14);
    }

    #[test]
    fn green_examples() {
        let set = CoefficientSet::free_particle();
        let basis = Arc::new(CharacteristicBasis::exact(&set).unwrap());
        let (x, y, t) = (0.7, -0.4, 0.35);
        let g = green_function(&basis, x, y, t).unwrap();
        let want = Complex64::new(0.0, 4.0 * PI * t).sqrt().inv()
            * Complex64::from_polar(1.0, (x - y) * (x - y) / (4.0 * t));
        assert!((g - want).norm() < 1e-14 * want.norm());

        let set = CoefficientSet::harmonic(1.0).unwrap();
        let basis = Arc::new(CharacteristicBasis::exact(&set).unwrap());
        let g = green_function(&basis, 0.0, 0.0, FRAC_PI_4).unwrap();
        assert!((g.norm() - (2.0 * PI * SQRT_2).powf(-0.5)).abs() < 1e-14);
        assert!(matches!(green_function(&basis, 0.0, 0.0, PI), Err(Error::FocalTime { .. })));

        // one caustic crossed: the prefactor picks up e^{−iπ/2}
        let before = GreenFunction::new(basis.clone()).kernel_at(PI - 0.3).unwrap();
        let after = GreenFunction::new(basis).kernel_at(PI + 0.3).unwrap();
        assert_eq!(after.caustics, 1);
        let ratio = after.prefactor / before.prefactor;
        assert!((ratio.arg() + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn small_time_green_matches_the_consistent_leading_term() {
        // (2πiμ₀)^{−1/2} with μ₀ ≈ 2a(0)t is (4πia(0)t)^{−1/2}
        let set = CoefficientSet::exponential(1.0).unwrap();
        let basis = Arc::new(solve_characteristic(&set, 1.0, DEFAULT_RTOL, DEFAULT_ATOL).unwrap());
        let t = 1e-4;
        let g = green_function(&basis, 0.01, -0.02, t).unwrap();
        let lead = (4.0 * PI * t).powf(-0.5);
        assert!((g.norm() / lead - 1.0).abs() < 1e-2);
    }

    #[test]
    fn lifted_free_kernel_equals_green_function() {
        let init = RiccatiState::initial(1.3, 0.1, 1.2, 0.3, 0.2, -0.1, 0.05).unwrap();
        for set in [
            CoefficientSet::free_particle(),
            CoefficientSet::harmonic(1.0).unwrap(),
            CoefficientSet::plasma(0.5).unwrap(),
            CoefficientSet::exponential(0.5).unwrap(),
        ] {
            let basis = Arc::new(CharacteristicBasis::exact(&set).unwrap());
            let traj = CompositionTrajectory::new(basis.clone(), init).unwrap();
            let frame = TransformFrame::new(Arc::new(traj), -2.0, Normalization::Lemma1).unwrap();
            for (x, y, t) in [(0.5, -1.0, 0.3), (2.0, 1.5, 1.1), (-3.0, 0.2, 0.05)] {
                let g = green_function(&basis, x, y, t).unwrap();
                let k = lift_free_propagator(&frame, x, y, t).unwrap();
                assert!((g - k).norm() < 1e-10 * g.norm(), "{:?}: {g} vs {k}", set.preset_kind());
            }
        }
        let f = TransformFrame::free_identity(1.0).unwrap();
        assert!(matches!(lift_free_propagator(&f, 0.0, 0.0, 0.0), Err(Error::DegenerateKernel { .. })));
    }

    #[test]
    fn free_gaussian_propagation() {
        let set = CoefficientSet::free_particle();
        let green = GreenFunction::new(Arc::new(CharacteristicBasis::exact(&set).unwrap()));
        let t = 0.3;
        let phi = |y: f64| Complex64::new((-y * y).exp(), 0.0);
        for x in [-1.5, 0.0, 0.4, 2.0] {
            let p = propagate_linear(&green, &phi, x, t, 8.0).unwrap();
            let z = Complex64::new(1.0, 4.0 * t);
            let want = z.sqrt().inv() * (-(x * x) / z).exp();
            assert!((p.value - want).norm() < 1e-8, "x = {x}");
            assert!(!p.truncated());
        }
        let p = propagate_linear(&green, &phi, 0.0, t, 2.0).unwrap();
        assert!(p.truncated());
    }

    #[test]
    fn harmonic_ground_state_is_stationary() {
        let omega = 1.0;
        let set = CoefficientSet::harmonic(omega).unwrap();
        let green = GreenFunction::new(Arc::new(CharacteristicBasis::exact(&set).unwrap()));
        let phi = move |y: f64| Complex64::new((-omega * y * y / 4.0).exp(), 0.0);
        for t in [0.4, 1.1, 2.5] {
            for x in [0.0, 1.3] {
                let p = propagate_linear(&green, &phi, x, t, 12.0).unwrap();
                assert!((p.value.norm() - phi(x).norm()).abs() < 1e-7, "t = {t}, x = {x}");
            }
        }
    }
}
