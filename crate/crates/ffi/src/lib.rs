//! C ABI for nls-canon.
//!
//! Objects are opaque handles created by `nls_*_new` functions and released with
//! the matching `nls_*_free`. Every fallible call returns an [`NlsStatus`]; the
//! message of the most recent failure on the calling thread is available from
//! [`nls_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use num_complex::Complex64;

use nls_canon::chareq::{solve_characteristic, CharacteristicBasis, DEFAULT_ATOL, DEFAULT_RTOL};
use nls_canon::coeffs::CoefficientSet;
use nls_canon::field::ComplexField;
use nls_canon::riccati::{build_trajectory, RiccatiState};
use nls_canon::scattering::{glm_reconstruct, ScatteringData};
use nls_canon::solutions::{build_solution, painleve_profile, Family, SolutionParams, WaveParams};
use nls_canon::transform::{green_function, lift_solution, Normalization, TransformFrame};
use nls_canon::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsStatus {
    Ok = 0,
    NullPointer,
    InvalidParameter,
    Domain,
    NonFiniteCoefficient,
    SingularCoefficient,
    IntegrationFailure,
    QuadratureFailure,
    SingularQuadrature,
    FocalPoint,
    FocalTime,
    Normalization,
    OutOfChart,
    DegenerateKernel,
    NonFiniteField,
    OutOfDomain,
    Resolution,
    DegenerateData,
    Unsupported,
    Divergence,
    ShapeMismatch,
    Other,
    Panic,
}

impl From<&Error> for NlsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => NlsStatus::InvalidParameter,
            Error::Domain { .. } => NlsStatus::Domain,
            Error::NonFiniteCoefficient { .. } => NlsStatus::NonFiniteCoefficient,
            Error::SingularCoefficient { .. } => NlsStatus::SingularCoefficient,
            Error::IntegrationFailure { .. } => NlsStatus::IntegrationFailure,
            Error::QuadratureFailure { .. } => NlsStatus::QuadratureFailure,
            Error::SingularQuadrature { .. } => NlsStatus::SingularQuadrature,
            Error::FocalPoint { .. } => NlsStatus::FocalPoint,
            Error::FocalTime { .. } => NlsStatus::FocalTime,
            Error::Normalization { .. } => NlsStatus::Normalization,
            Error::OutOfChart { .. } => NlsStatus::OutOfChart,
            Error::DegenerateKernel { .. } => NlsStatus::DegenerateKernel,
            Error::NonFiniteField { .. } => NlsStatus::NonFiniteField,
            Error::OutOfDomain { .. } => NlsStatus::OutOfDomain,
            Error::Resolution(_) => NlsStatus::Resolution,
            Error::DegenerateData(_) => NlsStatus::DegenerateData,
            Error::Unsupported(_) => NlsStatus::Unsupported,
            Error::Divergence { .. } => NlsStatus::Divergence,
            Error::ShapeMismatch(_) => NlsStatus::ShapeMismatch,
            _ => NlsStatus::Other,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for NlsComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<NlsComplex> for Complex64 {
    fn from(z: NlsComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsPreset {
    Free,
    Harmonic,
    Exponential,
    Plasma,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsNormalization {
    Lemma1,
    Civp,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsFamily {
    Bright,
    Dark,
    Cn,
    Dn,
    OneSoliton,
    TwoSoliton,
    Breather,
}

/// Traveling-wave parameters; ignored by the soliton families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsWaveParams {
    pub y: f64,
    pub g0: f64,
    pub h0: f64,
    pub c0: f64,
    pub phi: f64,
}

/// Standard solutions of the characteristic equation at one time.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsBasisValues {
    pub mu0: f64,
    pub mu0_prime: f64,
    pub mu1: f64,
    pub mu1_prime: f64,
}

/// Riccati state `mu, alpha, beta, gamma, delta, epsilon, kappa`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsRiccatiState {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub kappa: f64,
}

pub struct NlsCoefficients(CoefficientSet);

pub struct NlsBasis(Arc<CharacteristicBasis>);

pub struct NlsFrame(TransformFrame);

pub struct NlsSolution(ComplexField);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), NlsFailure>) -> NlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlsStatus::Ok,
        Ok(Err(NlsFailure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            NlsStatus::NullPointer
        }
        Ok(Err(NlsFailure::Lib(e))) => {
            set_last_error(e.to_string());
            NlsStatus::from(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            NlsStatus::Panic
        }
    }
}

enum NlsFailure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for NlsFailure {
    fn from(e: Error) -> Self {
        NlsFailure::Lib(e)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, NlsFailure> {
    p.as_ref().ok_or(NlsFailure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, NlsFailure> {
    p.as_mut().ok_or(NlsFailure::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &'static str) -> Result<&'a [T], NlsFailure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(NlsFailure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a, T>(p: *mut T, n: usize, what: &'static str) -> Result<&'a mut [T], NlsFailure> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(NlsFailure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Coefficients of a preset family with nonlinearity `h0`. `param` is ω for the
/// harmonic preset and k for the exponential and plasma presets.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nls_coeffs_preset(
    preset: NlsPreset,
    param: f64,
    h0: f64,
    out: *mut *mut NlsCoefficients,
) -> NlsStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        let set = match preset {
            NlsPreset::Free => CoefficientSet::free_particle(),
            NlsPreset::Harmonic => CoefficientSet::harmonic(param)?,
            NlsPreset::Exponential => CoefficientSet::exponential(param)?,
            NlsPreset::Plasma => CoefficientSet::plasma(param)?,
        };
        *out = boxed(NlsCoefficients(set.with_h0(h0)));
        Ok(())
    })
}

/// Coefficients of the linear-potential (Airy soliton) equation.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nls_coeffs_example3(
    alpha0: f64,
    beta0: f64,
    gamma0: f64,
    g0: f64,
    h0: f64,
    out: *mut *mut NlsCoefficients,
) -> NlsStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        let set = CoefficientSet::example3(alpha0, beta0, gamma0, g0)?.with_h0(h0);
        *out = boxed(NlsCoefficients(set));
        Ok(())
    })
}

/// Coefficients from a JSON document (NUL-terminated UTF-8).
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_coeffs_from_json(json: *const c_char, out: *mut *mut NlsCoefficients) -> NlsStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        if json.is_null() {
            return Err(NlsFailure::Null("json"));
        }
        let text = std::ffi::CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::Parse(format!("coefficient JSON is not UTF-8: {e}")))?;
        *out = boxed(NlsCoefficients(CoefficientSet::from_json(text)?));
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from `nls_coeffs_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nls_coeffs_free(p: *mut NlsCoefficients) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Characteristic basis: closed form when available, else integrated on `[0, t_end]`.
///
/// # Safety
/// `coeffs` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_basis_new(
    coeffs: *const NlsCoefficients,
    t_end: f64,
    out: *mut *mut NlsBasis,
) -> NlsStatus {
    guard(|| {
        let set = &deref(coeffs, "coeffs")?.0;
        let out = self::out(out, "out")?;
        let basis = match CharacteristicBasis::exact(set) {
            Some(b) => b,
            None => solve_characteristic(set, t_end, DEFAULT_RTOL, DEFAULT_ATOL)?,
        };
        *out = boxed(NlsBasis(Arc::new(basis)));
        Ok(())
    })
}

/// # Safety
/// `basis` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_basis_eval(basis: *const NlsBasis, t: f64, out: *mut NlsBasisValues) -> NlsStatus {
    guard(|| {
        let b = deref(basis, "basis")?.0.eval(t)?;
        *self::out(out, "out")? = NlsBasisValues {
            mu0: b.mu0,
            mu0_prime: b.mu0_prime,
            mu1: b.mu1,
            mu1_prime: b.mu1_prime,
        };
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`nls_basis_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nls_basis_free(p: *mut NlsBasis) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Green's function `G(x, y, t)` of the linear equation.
///
/// # Safety
/// `basis` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_green(basis: *const NlsBasis, x: f64, y: f64, t: f64, out: *mut NlsComplex) -> NlsStatus {
    guard(|| {
        let b = &deref(basis, "basis")?.0;
        *self::out(out, "out")? = green_function(b, x, y, t)?.into();
        Ok(())
    })
}

/// Transformation frame on `[0, t_end]` starting from `init` (NULL for the identity).
///
/// # Safety
/// `coeffs` must be a live handle, `init` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_frame_new(
    coeffs: *const NlsCoefficients,
    init: *const NlsRiccatiState,
    t_end: f64,
    normalization: NlsNormalization,
    out: *mut *mut NlsFrame,
) -> NlsStatus {
    guard(|| {
        let set = &deref(coeffs, "coeffs")?.0;
        let out = self::out(out, "out")?;
        let init = match init.as_ref() {
            Some(s) => RiccatiState::initial(s.mu, s.alpha, s.beta, s.gamma, s.delta, s.epsilon, s.kappa)?,
            None => RiccatiState::identity(),
        };
        let norm = match normalization {
            NlsNormalization::Lemma1 => Normalization::Lemma1,
            NlsNormalization::Civp => Normalization::Civp,
        };
        let traj = build_trajectory(set, init, t_end, None)?;
        *out = boxed(NlsFrame(TransformFrame::new(traj, set.h0, norm)?));
        Ok(())
    })
}

/// # Safety
/// `frame` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_frame_state(frame: *const NlsFrame, t: f64, out: *mut NlsRiccatiState) -> NlsStatus {
    guard(|| {
        let s = deref(frame, "frame")?.0.state(t)?;
        *self::out(out, "out")? = NlsRiccatiState {
            mu: s.mu,
            alpha: s.alpha,
            beta: s.beta,
            gamma: s.gamma,
            delta: s.delta,
            epsilon: s.epsilon,
            kappa: s.kappa,
        };
        Ok(())
    })
}

/// Nonlinear coupling `h(t)` of the equation the lifted fields solve.
///
/// # Safety
/// `frame` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_frame_coupling(frame: *const NlsFrame, t: f64, out: *mut f64) -> NlsStatus {
    guard(|| {
        *self::out(out, "out")? = deref(frame, "frame")?.0.coupling(t)?;
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`nls_frame_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nls_frame_free(p: *mut NlsFrame) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Exact solution of a family; `params` may be NULL for the defaults.
///
/// # Safety
/// `params` must be NULL or valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_solution_new(
    family: NlsFamily,
    params: *const NlsWaveParams,
    out: *mut *mut NlsSolution,
) -> NlsStatus {
    guard(|| {
        let out = self::out(out, "out")?;
        let mut p = SolutionParams::default();
        if let Some(w) = params.as_ref() {
            p.wave = WaveParams {
                y: w.y,
                g0: w.g0,
                h0: w.h0,
                c0: w.c0,
                phi: w.phi,
            };
        }
        let family = match family {
            NlsFamily::Bright => Family::Bright,
            NlsFamily::Dark => Family::Dark,
            NlsFamily::Cn => Family::Cn,
            NlsFamily::Dn => Family::Dn,
            NlsFamily::OneSoliton => Family::OneSoliton,
            NlsFamily::TwoSoliton => Family::TwoSoliton,
            NlsFamily::Breather => Family::Breather,
        };
        *out = boxed(NlsSolution(build_solution(family, &p)?.field));
        Ok(())
    })
}

/// Lifts `solution` through `frame`; the result is a new handle.
///
/// # Safety
/// `solution` and `frame` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_solution_lift(
    solution: *const NlsSolution,
    frame: *const NlsFrame,
    out: *mut *mut NlsSolution,
) -> NlsStatus {
    guard(|| {
        let chi = deref(solution, "solution")?.0.clone();
        let frame = &deref(frame, "frame")?.0;
        let out = self::out(out, "out")?;
        *out = boxed(NlsSolution(Arc::new(lift_solution(chi, frame))));
        Ok(())
    })
}

/// # Safety
/// `solution` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_solution_eval(
    solution: *const NlsSolution,
    x: f64,
    t: f64,
    out: *mut NlsComplex,
) -> NlsStatus {
    guard(|| {
        *self::out(out, "out")? = deref(solution, "solution")?.0.value(x, t)?.into();
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from `nls_solution_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nls_solution_free(p: *mut NlsSolution) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Reflectionless reconstruction from `n` eigenvalues and norming constants given at `t0`.
///
/// # Safety
/// `eigenvalues` and `norming` must point to `n` readable values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nls_glm(
    eigenvalues: *const NlsComplex,
    norming: *const NlsComplex,
    n: usize,
    t0: f64,
    x: f64,
    t: f64,
    out: *mut NlsComplex,
) -> NlsStatus {
    guard(|| {
        let lam = slice(eigenvalues, n, "eigenvalues")?.iter().map(|&z| z.into()).collect();
        let r = slice(norming, n, "norming")?.iter().map(|&z| z.into()).collect();
        let out = self::out(out, "out")?;
        let data = ScatteringData::reflectionless(lam, r, t0)?;
        *out = glm_reconstruct(&data, x, t)?.into();
        Ok(())
    })
}

/// Nonlinear Airy profile `u(ζ)` for `u ~ k0 Ai(ζ)`, sampled at `n` points not
/// below `zeta_end`.
///
/// # Safety
/// `zetas` must hold `n` readable values and `out` room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn nls_painleve(
    k0: f64,
    zeta_end: f64,
    zetas: *const f64,
    n: usize,
    out: *mut f64,
) -> NlsStatus {
    guard(|| {
        let zs = slice(zetas, n, "zetas")?;
        let out = slice_mut(out, n, "out")?;
        let profile = painleve_profile(k0, zeta_end)?;
        for (o, u) in out.iter_mut().zip(profile.sample(zs)?) {
            *o = u;
        }
        Ok(())
    })
}
