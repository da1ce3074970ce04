use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use nls_canon::chareq::{solve_characteristic, CharacteristicBasis, DEFAULT_ATOL, DEFAULT_RTOL};
use nls_canon::cli::green_equivalence;
use nls_canon::coeffs::{tau_sigma, CoefficientSet};
use nls_canon::field::{ComplexField, Field};
use nls_canon::numerics::ode::{dopri5, OdeOptions};
use nls_canon::riccati::{build_trajectory, lambda_factor, PathChoice, RiccatiState};
use nls_canon::scattering::{flatness_residual, Branch, GlmField, ScatteringData};
use nls_canon::solutions::{one_soliton, traveling_wave, two_soliton, OneSoliton, Profile, TwoSoliton, WaveParams};
use nls_canon::transform::{green_function, lift_solution, Normalization, TransformFrame};
use nls_canon::verify::{
    residual_nonautonomous, residual_standard, split_step_simulate, Grid2D, ResidualOptions, SplitStepOptions,
    StencilStep,
};

/// `(name, set, τ, σ)` with hand-derived constant characteristic data.
fn preset(idx: usize, p: f64) -> (CoefficientSet, f64, f64) {
    match idx {
        0 => (CoefficientSet::free_particle(), 0.0, 0.0),
        1 => (CoefficientSet::harmonic(p).unwrap(), 0.0, p * p / 4.0),
        2 => (CoefficientSet::exponential(p).unwrap(), -4.0 * p, 0.0),
        3 => (CoefficientSet::plasma(p).unwrap(), 0.0, 0.0),
        _ => (CoefficientSet::example3(0.05, 1.0, 0.2, p).unwrap(), 0.0, 0.0),
    }
}

fn init_strategy() -> impl Strategy<Value = RiccatiState> {
    (
        prop_oneof![0.5..2.0, -2.0..-0.5],
        -0.3..0.3,
        prop_oneof![0.5..2.0, -2.0..-0.5],
        -0.5..0.5,
        -0.5..0.5,
        -0.5..0.5,
        -0.5..0.5,
    )
        .prop_map(|(mu, al, be, ga, de, ep, ka)| RiccatiState::initial(mu, al, be, ga, de, ep, ka).unwrap())
}

fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * f(lo + h * i as f64)
        })
        .sum::<f64>()
        * h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tau_sigma_match_hand_derived_forms(idx in 0usize..5, p in 0.2f64..2.0, t in 0.0f64..3.0) {
        let (set, tau, sigma) = preset(idx, p);
        let (gt, gs) = tau_sigma(&set, t).unwrap();
        prop_assert!((gt - tau).abs() <= 1e-12 * tau.abs().max(1.0));
        prop_assert!((gs - sigma).abs() <= 1e-12 * sigma.abs().max(1.0));
    }

    #[test]
    fn dense_output_agrees_with_reintegration(tq in 0.05f64..4.9, omega in 0.5f64..3.0) {
        let opts = OdeOptions { rtol: 1e-10, atol: 1e-12, ..OdeOptions::default() };
        let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -omega * omega * y[0];
        };
        let dense = dopri5(rhs, 0.0, &[1.0, 0.0], 5.0, &opts).unwrap().eval(tq).unwrap();
        let direct = dopri5(rhs, 0.0, &[1.0, 0.0], tq, &opts).unwrap().eval(tq).unwrap();
        for (a, b) in dense.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 10.0 * (opts.rtol * b.abs() + opts.atol) + 1e-9);
        }
    }

    #[test]
    fn beta_mu_tracks_lambda(idx in 0usize..5, p in 0.2f64..1.0, init in init_strategy(), t in 0.01f64..0.6) {
        let (set, _, _) = preset(idx, p);
        let traj = build_trajectory(&set, init, 1.0, None).unwrap();
        let s = traj.state(t).unwrap();
        let want = init.beta * init.mu * lambda_factor(&set, t).unwrap();
        prop_assert!((s.beta * s.mu - want).abs() <= 1e-8 * want.abs());
    }

    #[test]
    fn gamma_is_monotone(idx in 0usize..5, p in 0.2f64..1.0, init in init_strategy()) {
        let (set, _, _) = preset(idx, p);
        let traj = build_trajectory(&set, init, 0.6, None).unwrap();
        let gs: Vec<f64> = (0..=30).map(|i| traj.state(0.02 * i as f64).unwrap().gamma).collect();
        // a > 0 for every preset, so γ' = −aβ² < 0
        prop_assert!(gs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn paths_agree(idx in 0usize..5, p in 0.2f64..1.0, init in init_strategy(), t in 0.0f64..0.6) {
        let (set, _, _) = preset(idx, p);
        let a = build_trajectory(&set, init, 0.6, Some(PathChoice::A)).unwrap().state(t).unwrap();
        let b = build_trajectory(&set, init, 0.6, Some(PathChoice::B)).unwrap().state(t).unwrap();
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            prop_assert!((x - y).abs() <= 1e-7 * y.abs().max(1.0), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn green_function_equals_lifted_free_kernel(idx in 0usize..4, p in 0.2f64..1.0, init in init_strategy()) {
        let (set, _, _) = preset(idx, p);
        let traj = build_trajectory(&set, init, 0.5, None).unwrap();
        let frame = TransformFrame::new(traj, -2.0, Normalization::Lemma1).unwrap();
        prop_assert!(green_equivalence(&frame, 20, 0.5).unwrap().sup_norm <= 1e-10);
    }

    #[test]
    fn two_soliton_modulus_has_period_quarter_pi(x in -6.0f64..6.0, t in 0.0f64..2.0) {
        let a = two_soliton(x, t + PI / 4.0).norm();
        let b = two_soliton(x, t).norm();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn soliton_norms_are_conserved(t in 0.0f64..3.0) {
        let n1 = trapezoid(|x| one_soliton(x, t).norm_sqr(), -40.0, 40.0, 16000);
        let n2 = trapezoid(|x| two_soliton(x, t).norm_sqr(), -40.0, 40.0, 16000);
        prop_assert!((n1 - 2.0).abs() <= 1e-8);
        prop_assert!((n2 - 8.0).abs() <= 1e-8);
    }

    #[test]
    fn flatness_is_lambda_independent(re in -2.0f64..2.0, im in -1.0f64..1.0) {
        let grid = Grid2D::new(-8.0, 8.0, 33, 0.0, 1.0, 8).unwrap();
        let l = Complex64::new(re, im);
        let opts = ResidualOptions::default();
        prop_assert!(flatness_residual(&OneSoliton, l, Branch::Focusing, &grid, &opts).unwrap().sup_norm <= 1e-8);
        prop_assert!(flatness_residual(&TwoSoliton, l, Branch::Focusing, &grid, &opts).unwrap().sup_norm <= 1e-8);
    }
}

fn glm_data() -> impl Strategy<Value = ScatteringData> {
    (1usize..=3)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec((-0.3f64..0.3, 0.4f64..1.0, 0.5f64..2.0, 0.0f64..(2.0 * PI)), n),
                Just(n),
            )
        })
        .prop_filter_map("eigenvalues too close", |(v, _)| {
            let lam: Vec<Complex64> = v.iter().enumerate().map(|(i, &(re, im, _, _))| Complex64::new(re, im + 0.6 * i as f64)).collect();
            let r = v.iter().map(|&(_, _, m, ph)| Complex64::from_polar(m, ph)).collect();
            ScatteringData::reflectionless(lam, r, 0.0).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn glm_reconstructions_solve_focusing_nls(data in glm_data()) {
        let field = GlmField::new(data.clone()).unwrap();
        let grid = Grid2D::new(-10.0, 10.0, 41, 0.0, 0.3, 8).unwrap();
        let r = residual_standard(&field, Branch::Focusing, &grid, &ResidualOptions::default()).unwrap();
        prop_assert!(r.sup_norm <= 1e-6, "{r:?}");

        let eta = data.eigenvalues.iter().map(|l| l.im).fold(f64::INFINITY, f64::min);
        let x_max = 15.0 / eta;
        for x in [-x_max, x_max] {
            prop_assert!(field.value(x, 0.0).unwrap().norm() <= 1e-8);
        }
    }

    #[test]
    fn lifted_waves_solve_the_nonautonomous_equation(
        idx in 0usize..5,
        p in 0.2f64..1.0,
        init in init_strategy(),
        g0 in 0.5f64..1.5,
        y in -0.5f64..0.5,
    ) {
        let (set, _, _) = preset(idx, p);
        let set = set.with_h0(-2.0);
        let frame = TransformFrame::for_coefficients(&set, init, 0.5, Normalization::Lemma1).unwrap();
        let chi: ComplexField = Arc::new(
            traveling_wave(Profile::Bright, WaveParams { y, g0, h0: -2.0, c0: 0.0, phi: 0.3 }).unwrap(),
        );
        let psi = lift_solution(chi, &frame);
        let grid = Grid2D::new(-6.0, 6.0, 25, 0.0, 0.5, 8).unwrap();
        let r = residual_nonautonomous(&psi, &set, &|t| frame.coupling(t), &grid, &ResidualOptions::default())
            .unwrap();
        prop_assert!(r.sup_norm <= 1e-6, "{r:?}");
    }

    #[test]
    fn green_columns_solve_the_linear_equation(idx in 0usize..4, p in 0.2f64..1.0, y0 in -1.0f64..1.0) {
        let (set, _, _) = preset(idx, p);
        let basis = Arc::new(CharacteristicBasis::exact(&set).unwrap());
        let b = basis.clone();
        let column = nls_canon::field::FnField::new(move |x: f64, t: f64| green_function(&b, x, y0, t).unwrap())
            .with_time_domain(0.1, 2.0);
        let grid = Grid2D::new(-2.0, 2.0, 16, 0.3, 1.0, 8).unwrap();
        let r = residual_nonautonomous(&column, &set, &|_| Ok(0.0), &grid, &ResidualOptions::default()).unwrap();
        let scale = (4.0 * PI * 0.3f64).powf(-0.5);
        prop_assert!(r.sup_norm <= 1e-6 * scale.max(1.0), "{r:?}");
    }
}

#[test]
fn harmonic_identity_reduces_to_the_displayed_formulas() {
    for omega in [0.5, 1.0, 2.0] {
        let set = CoefficientSet::harmonic(omega).unwrap();
        let traj = build_trajectory(&set, RiccatiState::identity(), 0.7, Some(PathChoice::Closed)).unwrap();
        for i in 0..=10 {
            let t = 0.07 * i as f64;
            let s = traj.state(t).unwrap();
            let (sn, cs) = (omega * t).sin_cos();
            let want = [cs, -(omega / 4.0) * sn / cs, 1.0 / cs, -sn / (omega * cs), 0.0, 0.0, 0.0];
            for (got, w) in s.as_array().iter().zip(want) {
                assert!((got - w).abs() <= 1e-13 * w.abs().max(1.0), "omega {omega}, t {t}: {s:?}");
            }
        }
    }
}

#[test]
fn tighter_tolerance_reduces_closed_form_mismatch() {
    for set in [CoefficientSet::harmonic(1.3).unwrap(), CoefficientSet::exponential(0.8).unwrap()] {
        let exact = CharacteristicBasis::exact(&set).unwrap();
        let mismatch = |rtol: f64| {
            let b = solve_characteristic(&set, 2.0, rtol, rtol * 1e-2).unwrap();
            (0..=40)
                .map(|i| {
                    let t = 0.05 * i as f64;
                    let (u, v) = (b.eval(t).unwrap(), exact.eval(t).unwrap());
                    (u.mu0 - v.mu0).abs().max((u.mu1 - v.mu1).abs())
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (mismatch(1e-6), mismatch(1e-7));
        assert!(coarse >= 5.0 * fine, "{coarse:e} vs {fine:e}");
    }
    let _ = (DEFAULT_RTOL, DEFAULT_ATOL);
}

#[test]
fn sixth_order_differencing() {
    let grid = Grid2D::new(-4.0, 4.0, 17, 0.0, 1.0, 8).unwrap();
    let at = |h: f64| {
        let opts = ResidualOptions {
            step: StencilStep::Fixed(h),
            analytic: false,
        };
        residual_standard(&OneSoliton, Branch::Focusing, &grid, &opts).unwrap().sup_norm
    };
    let (r1, r2) = (at(0.2), at(0.1));
    assert!(r1 / r2 >= 32.0 || r2 <= 1e-12, "{r1:e} -> {r2:e}");
}

#[test]
fn split_step_conserves_norm_without_gain() {
    let set = CoefficientSet::harmonic(0.5).unwrap();
    let initial = nls_canon::field::from_fn(|x, _| Complex64::new(1.0 / x.cosh(), 0.0));
    let grid = Grid2D::new(-32.0, 32.0 - 64.0 / 1024.0, 1024, 0.0, 1.0, 8).unwrap();
    let out = split_step_simulate(&set, &|_| Ok(-2.0), initial.as_ref(), &grid, &SplitStepOptions { dt: 1e-4 })
        .unwrap();
    let dx = grid.dx();
    let norm = |j: usize| out.row(j).iter().map(|v| v.norm_sqr()).sum::<f64>() * dx;
    assert!((norm(out.ts.len() - 1) - norm(0)).abs() <= 1e-8);
}
