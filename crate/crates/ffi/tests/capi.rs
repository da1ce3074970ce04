use std::ffi::CStr;
use std::ptr;

use nls_canon_ffi::*;

fn last_error() -> String {
    let p = nls_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(nls_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn harmonic_basis_and_green_function() {
    unsafe {
        let mut set = ptr::null_mut();
        assert_eq!(nls_coeffs_preset(NlsPreset::Harmonic, 1.0, -2.0, &mut set), NlsStatus::Ok);
        let mut basis = ptr::null_mut();
        assert_eq!(nls_basis_new(set, 1.0, &mut basis), NlsStatus::Ok);

        let mut v = NlsBasisValues { mu0: 0.0, mu0_prime: 0.0, mu1: 0.0, mu1_prime: 0.0 };
        assert_eq!(nls_basis_eval(basis, 0.7, &mut v), NlsStatus::Ok);
        assert!((v.mu0 - 2.0 * 0.7f64.sin()).abs() < 1e-14);
        assert!((v.mu1 - 0.7f64.cos()).abs() < 1e-14);

        // Mehler kernel modulus (2π·2 sin t)^{-1/2}
        let mut g = NlsComplex { re: 0.0, im: 0.0 };
        assert_eq!(nls_green(basis, 0.3, -0.4, 0.5, &mut g), NlsStatus::Ok);
        let want = (4.0 * std::f64::consts::PI * 0.5f64.sin()).powf(-0.5);
        assert!(((g.re * g.re + g.im * g.im).sqrt() - want).abs() < 1e-12);

        nls_basis_free(basis);
        nls_coeffs_free(set);
    }
}

#[test]
fn lifted_bright_soliton_in_the_tappert_frame() {
    unsafe {
        let mut set = ptr::null_mut();
        assert_eq!(nls_coeffs_preset(NlsPreset::Plasma, 0.5, -2.0, &mut set), NlsStatus::Ok);
        let mut frame = ptr::null_mut();
        assert_eq!(
            nls_frame_new(set, ptr::null(), 1.0, NlsNormalization::Lemma1, &mut frame),
            NlsStatus::Ok
        );
        let mut h = 0.0;
        assert_eq!(nls_frame_coupling(frame, 0.4, &mut h), NlsStatus::Ok);
        assert!((h + 2.0).abs() < 1e-14);

        let mut sol = ptr::null_mut();
        assert_eq!(nls_solution_new(NlsFamily::Bright, ptr::null(), &mut sol), NlsStatus::Ok);
        let mut lifted = ptr::null_mut();
        assert_eq!(nls_solution_lift(sol, frame, &mut lifted), NlsStatus::Ok);

        // identity data: lifted field at t = 0 is the seed
        let (mut a, mut b) = (NlsComplex { re: 0.0, im: 0.0 }, NlsComplex { re: 0.0, im: 0.0 });
        assert_eq!(nls_solution_eval(sol, 0.8, 0.0, &mut a), NlsStatus::Ok);
        assert_eq!(nls_solution_eval(lifted, 0.8, 0.0, &mut b), NlsStatus::Ok);
        assert!((a.re - b.re).abs() < 1e-14 && (a.im - b.im).abs() < 1e-14);
        assert!((a.re - 1.0 / 0.8f64.cosh()).abs() < 1e-14);

        let mut s = NlsRiccatiState { mu: 0.0, alpha: 0.0, beta: 0.0, gamma: 0.0, delta: 0.0, epsilon: 0.0, kappa: 0.0 };
        assert_eq!(nls_frame_state(frame, 0.0, &mut s), NlsStatus::Ok);
        assert_eq!((s.mu, s.beta), (1.0, 1.0));

        nls_solution_free(lifted);
        nls_solution_free(sol);
        nls_frame_free(frame);
        nls_coeffs_free(set);
    }
}

#[test]
fn glm_one_soliton() {
    let lam = [NlsComplex { re: 0.0, im: 0.5 }];
    let r = [NlsComplex { re: 0.0, im: -1.0 }];
    let mut out = NlsComplex { re: 0.0, im: 0.0 };
    let st = unsafe { nls_glm(lam.as_ptr(), r.as_ptr(), 1, 0.0, 1.3, 0.0, &mut out) };
    assert_eq!(st, NlsStatus::Ok);
    assert!((out.re - 1.0 / 1.3f64.cosh()).abs() < 1e-14 && out.im.abs() < 1e-14);
}

#[test]
fn painleve_samples_and_domain_error() {
    let zs = [0.0, -1.0, -2.0];
    let mut out = [0.0; 3];
    let st = unsafe { nls_painleve(1e-6, -3.0, zs.as_ptr(), 3, out.as_mut_ptr()) };
    assert_eq!(st, NlsStatus::Ok);
    assert!((out[0] / 1e-6 - 0.355_028_053_887_817_2).abs() < 1e-6);

    let st = unsafe { nls_painleve(1.5, -3.0, zs.as_ptr(), 3, out.as_mut_ptr()) };
    assert_eq!(st, NlsStatus::Domain);
    assert!(last_error().contains("k0"));
}

#[test]
fn null_pointers_and_library_errors_are_reported() {
    unsafe {
        assert_eq!(nls_coeffs_preset(NlsPreset::Free, 0.0, -2.0, ptr::null_mut()), NlsStatus::NullPointer);
        assert!(last_error().contains("out"));

        let mut set = ptr::null_mut();
        assert_eq!(nls_coeffs_preset(NlsPreset::Harmonic, 0.0, -2.0, &mut set), NlsStatus::InvalidParameter);
        assert!(set.is_null());

        let mut out = NlsComplex { re: 0.0, im: 0.0 };
        assert_eq!(nls_green(ptr::null(), 0.0, 0.0, 1.0, &mut out), NlsStatus::NullPointer);

        nls_coeffs_free(ptr::null_mut());
        nls_solution_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/nls_canon.h");
    for name in [
        "nls_version",
        "nls_last_error_message",
        "nls_coeffs_preset",
        "nls_coeffs_example3",
        "nls_coeffs_from_json",
        "nls_basis_new",
        "nls_green",
        "nls_frame_new",
        "nls_solution_lift",
        "nls_glm",
        "nls_painleve",
        "NLS_STATUS_PANIC",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}
