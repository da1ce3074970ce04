//! Airy functions, Jacobi elliptic functions and the complex log-gamma function.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

const AI0: f64 = 0.355_028_053_887_817_239;
const AIP0: f64 = 0.258_819_403_792_806_798;

/// Returns `(Ai(x), Ai'(x))`.
///
/// Maclaurin series on `[-7, 2]`, the `K_{1/3}`, `K_{2/3}` integral representation
/// (trapezoidal rule, spectrally accurate) for `x > 2`, and the oscillatory
/// asymptotic expansion for `x < -7`.
pub fn airy(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x > 2.0 {
        airy_bessel_k(x)
    } else if x >= -7.0 {
        airy_series(x)
    } else {
        airy_asymptotic_negative(-x)
    }
}

fn airy_series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut g, mut fp, mut gp) = (1.0, x, 0.0, 1.0);
    let (mut tf, mut tg, mut tfp, mut tgp) = (1.0, x, x * x / 2.0, 1.0);
    fp += tfp;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tfp *= x3 / ((3.0 * kf) * (3.0 * kf + 2.0));
        tgp *= x3 / ((3.0 * kf - 2.0) * (3.0 * kf));
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
        let scale = f.abs() + g.abs() + fp.abs() + gp.abs();
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-18 * scale {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp)
}

// e^{xi} K_nu(xi) = int_0^inf exp(-xi (cosh s - 1)) cosh(nu s) ds
fn scaled_bessel_k(nu: f64, xi: f64) -> f64 {
    let h = 0.2;
    let mut sum = 0.5;
    for k in 1..2000 {
        let s = k as f64 * h;
        let e = xi * (s.cosh() - 1.0);
        let term = (-e).exp() * (nu * s).cosh();
        sum += term;
        if e > 60.0 && term < 1e-18 * sum {
            break;
        }
    }
    h * sum
}

fn airy_bessel_k(x: f64) -> (f64, f64) {
    let xi = 2.0 / 3.0 * x.powf(1.5);
    let damp = (-xi).exp();
    let ai = (x / 3.0).sqrt() / PI * damp * scaled_bessel_k(1.0 / 3.0, xi);
    let aip = -x / (PI * 3f64.sqrt()) * damp * scaled_bessel_k(2.0 / 3.0, xi);
    (ai, aip)
}

fn airy_asymptotic_negative(z: f64) -> (f64, f64) {
    let xi = 2.0 / 3.0 * z.powf(1.5);
    // u_k, v_k coefficients
    let mut u = [0.0f64; 40];
    let mut v = [0.0f64; 40];
    u[0] = 1.0;
    v[0] = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -u[k] * (6.0 * kf + 1.0) / (6.0 * kf - 1.0);
    }
    let (mut pu, mut qu, mut pv, mut qv) = (0.0, 0.0, 0.0, 0.0);
    let mut last = f64::INFINITY;
    let mut xik = 1.0;
    for k in 0..40 {
        let term_u = u[k] / xik;
        let term_v = v[k] / xik;
        let mag = term_u.abs().max(term_v.abs());
        if mag > last {
            break;
        }
        last = mag;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            pu += sign * term_u;
            pv += sign * term_v;
        } else {
            qu += sign * term_u;
            qv += sign * term_v;
        }
        if mag < 1e-17 {
            break;
        }
        xik *= xi;
    }
    let (s, c) = (xi - FRAC_PI_4).sin_cos();
    let pre = 1.0 / PI.sqrt();
    let ai = pre * z.powf(-0.25) * (c * pu + s * qu);
    let aip = pre * z.powf(0.25) * (s * pv - c * qv);
    (ai, aip)
}

/// Jacobi elliptic functions `(sn, cn, dn)` of argument `u` and parameter `m ∈ [0, 1]`,
/// by the descending Landen / arithmetic–geometric mean scheme.
pub fn jacobi_sn_cn_dn(u: f64, m: f64) -> (f64, f64, f64) {
    if m <= 0.0 {
        let (s, c) = u.sin_cos();
        return (s, c, 1.0);
    }
    if m >= 1.0 {
        let sech = 1.0 / u.cosh();
        return (u.tanh(), sech, sech);
    }
    let mut a = [0.0f64; 32];
    let mut c = [0.0f64; 32];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while c[n].abs() > 1e-16 && n < 31 {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (1.0 - m * sn * sn).sqrt();
    (sn, cn, dn)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex log-gamma (Lanczos approximation with reflection for `Re z < 1/2`).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi.ln() - (pi * z).sin().ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}
