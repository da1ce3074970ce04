//! Dormand–Prince 5(4) integrator with the Hairer continuous extension.
//!
//! Every accepted step stores the five coefficient vectors of the 4th-order
//! dense-output polynomial, so the returned [`DenseSolution`] is C¹ in t and
//! can be evaluated anywhere on the integrated span.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed step magnitude.
    pub h_max: f64,
    pub max_steps: usize,
    /// Abort with an integration failure once any component exceeds this magnitude.
    pub max_abs: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 200_000,
            max_abs: f64::INFINITY,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
struct Segment {
    t: f64,
    h: f64,
    // rcont[k * dim + i], k = 0..5
    rcont: Vec<f64>,
}

/// Continuous solution produced by [`dopri5`].
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    t0: f64,
    t1: f64,
    y0: Vec<f64>,
    segments: Vec<Segment>,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Start and end of the integrated span (end may precede start for backward runs).
    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = self.bounds();
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        t >= lo - slack && t <= hi + slack
    }

    fn bounds(&self) -> (f64, f64) {
        if self.t0 <= self.t1 {
            (self.t0, self.t1)
        } else {
            (self.t1, self.t0)
        }
    }

    /// Times at which accepted steps begin, followed by the final time.
    pub fn step_times(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.t).collect();
        v.push(self.t1);
        v
    }

    pub fn n_steps(&self) -> usize {
        self.segments.len()
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if !self.contains(t) {
            let (lo, hi) = self.bounds();
            return Err(Error::OutOfDomain { t, lo, hi });
        }
        if self.segments.is_empty() {
            out.copy_from_slice(&self.y0);
            return Ok(());
        }
        let dir = (self.t1 - self.t0).signum();
        let idx = self
            .segments
            .partition_point(|s| (s.t - t) * dir <= 0.0)
            .saturating_sub(1);
        let seg = &self.segments[idx];
        let theta = ((t - seg.t) / seg.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        let n = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let r = |k: usize| seg.rcont[k * n + i];
            *o = r(0) + theta * (r(1) + theta1 * (r(2) + theta * (r(3) + theta1 * r(4))));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    pub fn final_state(&self) -> Vec<f64> {
        self.eval(self.t1).expect("end of span is always in range")
    }
}

fn weighted_rms(err: &[f64], y0: &[f64], y1: &[f64], opts: &OdeOptions) -> f64 {
    let n = err.len() as f64;
    let s: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sk = opts.atol + opts.rtol * a.abs().max(b.abs());
            (e / sk).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], t_end: f64, opts: &OdeOptions) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameter("rtol and atol must be positive".into()));
    }
    if !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidParameter("integration bounds must be finite".into()));
    }
    let mut sol = DenseSolution {
        dim: n,
        t0,
        t1: t_end,
        y0: y0.to_vec(),
        segments: Vec::new(),
    };
    if t_end == t0 {
        return Ok(sol);
    }
    let dir = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut err = vec![0.0; n];

    f(t, &y, &mut k1);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationFailure {
            t_last: t,
            reason: "non-finite derivative at the initial point".into(),
        });
    }

    let h_max = opts.h_max.min((t_end - t0).abs());
    let mut h = initial_step(&mut f, t, &y, &k1, dir, h_max, opts, &mut ytmp, &mut k2);

    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                t_last: t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        if (t + 1.01 * h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1e-300) || h.abs() < 1e-300 {
            return Err(Error::IntegrationFailure {
                t_last: t,
                reason: "step size collapsed".into(),
            });
        }
        steps += 1;

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &ytmp, &mut k6);
        for i in 0..n {
            y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, &y1, &mut k7);
        for i in 0..n {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let finite = y1.iter().chain(k7.iter()).all(|v| v.is_finite());
        let e = if finite {
            weighted_rms(&err, &y, &y1, opts)
        } else {
            f64::INFINITY
        };

        let fac11 = e.powf(0.17);
        if e <= 1.0 {
            let mut rcont = vec![0.0; 5 * n];
            for i in 0..n {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[i] = y[i];
                rcont[n + i] = ydiff;
                rcont[2 * n + i] = bspl;
                rcont[3 * n + i] = ydiff - h * k7[i] - bspl;
                rcont[4 * n + i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            sol.segments.push(Segment { t, h, rcont });

            let mut fac = fac11 / facold.powf(0.04);
            fac = (fac / 0.9).clamp(0.1, 5.0);
            let mut h_new = h / fac;
            if h_new.abs() > h_max {
                h_new = dir * h_max;
            }
            if last_rejected {
                h_new = dir * h_new.abs().min(h.abs());
            }
            facold = e.max(1e-4);
            last_rejected = false;

            t += h;
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);

            if let Some(v) = y.iter().find(|v| v.abs() > opts.max_abs) {
                return Err(Error::IntegrationFailure {
                    t_last: t,
                    reason: format!("solution magnitude {v:e} exceeds the bound"),
                });
            }
            if (t - t_end) * dir >= 0.0 {
                sol.t1 = t_end;
                return Ok(sol);
            }
            h = h_new;
        } else {
            let shrink = if finite { (fac11 / 0.9).min(5.0) } else { 5.0 };
            h /= shrink;
            last_rejected = true;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    h_max: f64,
    opts: &OdeOptions,
    ytmp: &mut [f64],
    f1: &mut [f64],
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..n {
        let sk = opts.atol + opts.rtol * y[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);
    for i in 0..n {
        ytmp[i] = y[i] + dir * h * f0[i];
    }
    f(t + dir * h, ytmp, f1);
    let mut der2 = 0.0;
    for i in 0..n {
        let sk = opts.atol + opts.rtol * y[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        1e-6_f64.max(h * 1e-3)
    } else {
        (0.01 / der12).powf(0.2)
    };
    dir * (100.0 * h).min(h1).min(h_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn harmonic_oscillator_matches_sine() {
        let opts = OdeOptions::with_tolerances(1e-11, 1e-13);
        let sol = dopri5(oscillator, 0.0, &[0.0, 1.0], 10.0, &opts).unwrap();
        for k in 0..=200 {
            let t = 10.0 * k as f64 / 200.0;
            let y = sol.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-9, "t = {t}");
            assert!((y[1] - t.cos()).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn backward_integration() {
        let sol = dopri5(
            |_, y, dy| dy[0] = y[0],
            1.0,
            &[1.0],
            -2.0,
            &OdeOptions::with_tolerances(1e-12, 1e-14),
        )
        .unwrap();
        let y = sol.eval(-1.5).unwrap();
        assert!((y[0] - (-2.5f64).exp()).abs() < 1e-11);
        assert!(sol.eval(1.5).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let opts = OdeOptions {
            max_abs: 1e6,
            ..OdeOptions::default()
        };
        let err = dopri5(|_, y, dy| dy[0] = y[0] * y[0], 0.0, &[1.0], 2.0, &opts).unwrap_err();
        match err {
            Error::IntegrationFailure { t_last, .. } => assert!(t_last < 1.0 && t_last > 0.99),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn zero_length_span() {
        let sol = dopri5(oscillator, 0.5, &[1.0, 2.0], 0.5, &OdeOptions::default()).unwrap();
        assert_eq!(sol.eval(0.5).unwrap(), vec![1.0, 2.0]);
    }
}
