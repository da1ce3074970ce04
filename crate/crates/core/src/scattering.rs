//! Lax pair of the standard NLS `iΨ_T + Ψ_XX ± 2|Ψ|²Ψ = 0`, the
//! Zakharov–Shabat system and reflectionless inverse scattering.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldDerivs};
use crate::verify::residual::{residual_on_grid, ResidualOptions};
use crate::verify::{Grid2D, ResidualReport};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sign of the cubic term in the standard form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `+2|Ψ|²Ψ`, the upper signs of the Lax pair.
    Focusing,
    Defocusing,
}

impl Branch {
    /// `+1` focusing, `−1` defocusing.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Focusing => 1.0,
            Branch::Defocusing => -1.0,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Focusing => "focusing",
            Branch::Defocusing => "defocusing",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxMatrices {
    pub u: Matrix2<Complex64>,
    pub v: Matrix2<Complex64>,
    pub lambda: Complex64,
    pub branch: Branch,
}

/// `U = [[−iλ, Ψ], [∓Ψ*, iλ]]`,
/// `V = [[i(−2λ² ± |Ψ|²), 2λΨ + iΨ_X], [∓2λΨ* ± iΨ_X*, i(2λ² ∓ |Ψ|²)]]`.
pub fn lax_matrices(psi: Complex64, psi_x: Complex64, lambda: Complex64, branch: Branch) -> LaxMatrices {
    let s = branch.sign();
    let l2 = lambda * lambda;
    let m = psi.norm_sqr();
    let u = Matrix2::new(-I * lambda, psi, -s * psi.conj(), I * lambda);
    let v = Matrix2::new(
        I * (-2.0 * l2 + s * m),
        2.0 * lambda * psi + I * psi_x,
        -2.0 * s * lambda * psi.conj() + s * I * psi_x.conj(),
        I * (2.0 * l2 - s * m),
    );
    LaxMatrices { u, v, lambda, branch }
}

/// `U_T − V_X + [U, V]` from pointwise derivatives.
pub fn zero_curvature(d: &FieldDerivs, lambda: Complex64, branch: Branch) -> Matrix2<Complex64> {
    let s = branch.sign();
    let m = lax_matrices(d.value, d.dx, lambda, branch);
    let u_t = Matrix2::new(Complex64::new(0.0, 0.0), d.dt, -s * d.dt.conj(), Complex64::new(0.0, 0.0));
    let dm = 2.0 * (d.value * d.dx.conj()).re;
    let v_x = Matrix2::new(
        I * s * dm,
        2.0 * lambda * d.dx + I * d.dxx,
        -2.0 * s * lambda * d.dx.conj() + s * I * d.dxx.conj(),
        -I * s * dm,
    );
    u_t - v_x + m.u * m.v - m.v * m.u
}

/// Sup over the grid of the entrywise max-norm of the zero-curvature matrix.
pub fn flatness_residual(
    psi: &dyn Field,
    lambda: Complex64,
    branch: Branch,
    grid: &Grid2D,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    residual_on_grid(psi, grid, opts, |_, _, d| {
        Ok(zero_curvature(d, lambda, branch).iter().map(|z| z.norm()).fold(0.0, f64::max))
    })
}

/// `(∂_X Φ, ∂_T Φ) = (UΦ, VΦ)`.
pub fn zs_apply(m: &LaxMatrices, phi: Vector2<Complex64>) -> (Vector2<Complex64>, Vector2<Complex64>) {
    (m.u * phi, m.v * phi)
}

/// Reflection coefficient `b(λ)` on the real axis.
pub type Reflection = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub struct ScatteringData {
    pub eigenvalues: Vec<Complex64>,
    pub norming: Vec<Complex64>,
    /// Absent for reflectionless data.
    pub reflection: Option<Reflection>,
    pub t0: f64,
}

impl fmt::Debug for ScatteringData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScatteringData")
            .field("eigenvalues", &self.eigenvalues)
            .field("norming", &self.norming)
            .field("reflectionless", &self.reflection.is_none())
            .field("t0", &self.t0)
            .finish()
    }
}

impl ScatteringData {
    /// Reflectionless data; every eigenvalue must lie in the upper half plane.
    pub fn reflectionless(eigenvalues: Vec<Complex64>, norming: Vec<Complex64>, t0: f64) -> Result<Self> {
        if eigenvalues.len() != norming.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} eigenvalues but {} norming constants",
                eigenvalues.len(),
                norming.len()
            )));
        }
        if let Some(l) = eigenvalues.iter().find(|l| !(l.im > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter(format!("eigenvalue {l} must satisfy Im > 0")));
        }
        if let Some(r) = norming.iter().find(|r| !r.is_finite()) {
            return Err(Error::InvalidParameter(format!("norming constant {r} is not finite")));
        }
        Ok(Self {
            eigenvalues,
            norming,
            reflection: None,
            t0,
        })
    }

    pub fn is_reflectionless(&self) -> bool {
        self.reflection.is_none()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// `r_n(T) = r_n(T₀) e^{4iλ_n²(T−T₀)}`, `b(λ, T) = b(λ, T₀) e^{4iλ²(T−T₀)}`.
pub fn evolve_scattering_data(data: &ScatteringData, t: f64) -> ScatteringData {
    let dt = t - data.t0;
    let norming = data
        .eigenvalues
        .iter()
        .zip(&data.norming)
        .map(|(l, r)| r * (4.0 * I * l * l * dt).exp())
        .collect();
    let reflection = data.reflection.clone().map(|b| {
        Arc::new(move |l: f64| b(l) * (4.0 * I * l * l * dt).exp()) as Reflection
    });
    ScatteringData {
        eigenvalues: data.eigenvalues.clone(),
        norming,
        reflection,
        t0: t,
    }
}

/// Condition numbers above this are reported.
pub const CONDITION_WARNING: f64 = 1e12;

/// Output of the separable GLM solve at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub value: Complex64,
    pub condition: f64,
}

/// Solves the Gelfand–Levitan–Marchenko equation for the kernel
/// `B(X, T) = −i Σ r_n e^{i(λ_n X + 4λ_n²(T − T₀))}` and returns `Ψ = −2K(X, X, T)`.
///
/// The kernel is separable, so the equation reduces to an N×N linear system
/// whose entries are geometric integrals over `[X, ∞)`.
pub fn glm_reconstruct(data: &ScatteringData, x: f64, t: f64) -> Result<Complex64> {
    let r = glm_solve(data, x, t)?;
    if r.condition > CONDITION_WARNING {
        log::warn!("GLM system at X = {x}, T = {t} has condition number {:.3e}", r.condition);
    }
    Ok(r.value)
}

pub fn glm_solve(data: &ScatteringData, x: f64, t: f64) -> Result<Reconstruction> {
    let Some(sys) = GlmSystem::new(data, x, t)? else {
        return Ok(Reconstruction {
            value: Complex64::new(0.0, 0.0),
            condition: 1.0,
        });
    };
    Ok(Reconstruction {
        value: -2.0 * sys.u.sum(),
        condition: sys.condition,
    })
}

type CMat = DMatrix<Complex64>;

/// A matrix with its first and second `X` derivatives and first `T` derivative.
#[derive(Clone)]
struct Jet {
    v: CMat,
    x: CMat,
    xx: CMat,
    t: CMat,
}

impl Jet {
    fn constant(v: CMat) -> Self {
        let z = CMat::zeros(v.nrows(), v.ncols());
        Self { x: z.clone(), xx: z.clone(), t: z, v }
    }

    /// `diag(d)` where `∂ₓd = a·d` and `∂ₜd = b·d` entrywise.
    fn exp_diag(d: &[Complex64], a: &[Complex64], b: &[Complex64]) -> Self {
        let dg = |f: &dyn Fn(usize) -> Complex64| CMat::from_diagonal(&DVector::from_fn(d.len(), |i, _| f(i)));
        Self {
            v: dg(&|i| d[i]),
            x: dg(&|i| a[i] * d[i]),
            xx: dg(&|i| a[i] * a[i] * d[i]),
            t: dg(&|i| b[i] * d[i]),
        }
    }

    fn mul(&self, o: &Jet) -> Jet {
        let two = Complex64::new(2.0, 0.0);
        Jet {
            v: &self.v * &o.v,
            x: &self.x * &o.v + &self.v * &o.x,
            xx: &self.xx * &o.v + &self.x * &o.x * two + &self.v * &o.xx,
            t: &self.t * &o.v + &self.v * &o.t,
        }
    }

    fn add(&self, o: &Jet, sign: f64) -> Jet {
        let s = Complex64::new(sign, 0.0);
        Jet {
            v: &self.v + &o.v * s,
            x: &self.x + &o.x * s,
            xx: &self.xx + &o.xx * s,
            t: &self.t + &o.t * s,
        }
    }
}

/// The system `(I − Ē CᵀEC)u = iē` solved in whichever of two equivalent forms
/// `M z = c`, `u = R z` is better conditioned.
struct GlmSystem {
    m: Jet,
    rhs: Jet,
    right: Option<Jet>,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
    z: DVector<Complex64>,
    u: DVector<Complex64>,
}

impl GlmSystem {
    fn new(data: &ScatteringData, x: f64, t: f64) -> Result<Option<Self>> {
        if !data.is_reflectionless() {
            return Err(Error::Unsupported("GLM reconstruction is implemented for reflectionless data only".into()));
        }
        let lam = &data.eigenvalues;
        let n = lam.len();
        for i in 0..n {
            for j in 0..i {
                if (lam[i] - lam[j]).norm() <= 1e-12 * lam[i].norm().max(1.0) {
                    return Err(Error::Unsupported(format!("repeated eigenvalue {}", lam[i])));
                }
            }
        }
        if n == 0 {
            return Ok(None);
        }
        let dt = t - data.t0;
        let e: Vec<Complex64> = lam
            .iter()
            .zip(&data.norming)
            .map(|(l, r)| r * (4.0 * I * l * l * dt + 2.0 * I * l * x).exp())
            .collect();
        // ∂ₓe = 2iλe, ∂ₜe = 4iλ²e
        let ax: Vec<Complex64> = lam.iter().map(|l| 2.0 * I * l).collect();
        let at: Vec<Complex64> = lam.iter().map(|l| 4.0 * I * l * l).collect();
        let conj = |v: &[Complex64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
        let neg = |v: &[Complex64]| v.iter().map(|z| -z).collect::<Vec<_>>();
        let inv = |v: &[Complex64]| v.iter().map(|z| 1.0 / z).collect::<Vec<_>>();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);

        let cauchy = CMat::from_fn(n, n, |k, j| 1.0 / (lam[k] - lam[j].conj()));
        let ej = Jet::exp_diag(&e, &ax, &at);
        let ebar = Jet::exp_diag(&conj(&e), &conj(&ax), &conj(&at));
        let ones = Jet::constant(CMat::from_element(n, 1, I));
        let ident = Jet::constant(CMat::identity(n, n));

        // rows where |e| > 1 divided by conj(e)
        let direct = {
            let k = Jet::constant(cauchy.transpose()).mul(&ej).mul(&Jet::constant(cauchy.clone()));
            let scaled = |r: usize| e[r].norm() > 1.0;
            let ps = Jet::constant(CMat::from_diagonal(&DVector::from_fn(n, |r, _| if scaled(r) { one } else { zero })));
            let pu = Jet::constant(CMat::identity(n, n)).add(&ps, -1.0);
            let ebar_inv = Jet::exp_diag(&inv(&conj(&e)), &neg(&conj(&ax)), &neg(&conj(&at)));
            let m = ps.mul(&ebar_inv.add(&k, -1.0)).add(&pu.mul(&ident.add(&ebar.mul(&k), -1.0)), 1.0);
            let rhs = ps.mul(&ones).add(&pu.mul(&ebar).mul(&ones), 1.0);
            Some((m, rhs, None))
        };
        // u = C⁻¹E⁻¹C⁻ᵀz gives (Ē⁻¹C⁻¹E⁻¹C⁻ᵀ − I)z = i·1, well scaled where every |e| is large
        let inverse = if e.iter().all(|v| v.norm() > 0.0) {
            cauchy.clone().try_inverse().map(|ci| {
                let p = Jet::constant(ci.clone())
                    .mul(&Jet::exp_diag(&inv(&e), &neg(&ax), &neg(&at)))
                    .mul(&Jet::constant(ci.transpose()));
                let ebar_inv = Jet::exp_diag(&inv(&conj(&e)), &neg(&conj(&ax)), &neg(&conj(&at)));
                (ebar_inv.mul(&p).add(&ident, -1.0), ones.clone(), Some(p))
            })
        } else {
            None
        };

        let mut best: Option<Self> = None;
        for (m, rhs, right) in [direct, inverse].into_iter().flatten() {
            if !m.v.iter().all(|v| v.is_finite()) {
                continue;
            }
            let sv = m.v.clone().singular_values();
            let (smax, smin) = (sv.max(), sv.min());
            let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
            if !condition.is_finite() || best.as_ref().is_some_and(|b| b.condition <= condition) {
                continue;
            }
            let lu = m.v.clone().lu();
            let Some(z) = lu.solve(&rhs.v.column(0).into_owned()) else { continue };
            let u = match &right {
                Some(p) => &p.v * &z,
                None => z.clone(),
            };
            if u.iter().all(|v| v.is_finite()) {
                best = Some(Self { m, rhs, right, lu, condition, z, u });
            }
        }
        best.map(Some)
            .ok_or_else(|| Error::DegenerateData(format!("singular GLM system at X = {x}, T = {t}")))
    }

    /// Derivatives of `Ψ = −2Σu` from differentiating `M z = c` and `u = R z`.
    fn derivatives(&self) -> Option<FieldDerivs> {
        let two = Complex64::new(2.0, 0.0);
        let col = |m: &CMat| m.column(0).into_owned();
        let z = &self.z;
        let zx = self.lu.solve(&(col(&self.rhs.x) - &self.m.x * z))?;
        let zxx = self.lu.solve(&(col(&self.rhs.xx) - &self.m.xx * z - &self.m.x * &zx * two))?;
        let zt = self.lu.solve(&(col(&self.rhs.t) - &self.m.t * z))?;
        let (ux, uxx, ut) = match &self.right {
            Some(r) => (
                &r.x * z + &r.v * &zx,
                &r.xx * z + &r.x * &zx * two + &r.v * &zxx,
                &r.t * z + &r.v * &zt,
            ),
            None => (zx, zxx, zt),
        };
        let out = FieldDerivs {
            value: -2.0 * self.u.sum(),
            dx: -2.0 * ux.sum(),
            dxx: -2.0 * uxx.sum(),
            dt: -2.0 * ut.sum(),
        };
        [out.value, out.dx, out.dxx, out.dt].iter().all(|v| v.is_finite()).then_some(out)
    }
}

/// A reconstructed N-soliton as a field on `(X, T)`.
pub struct GlmField {
    data: ScatteringData,
}

impl GlmField {
    pub fn new(data: ScatteringData) -> Result<Self> {
        glm_solve(&data, 0.0, data.t0)?;
        Ok(Self { data })
    }

    pub fn data(&self) -> &ScatteringData {
        &self.data
    }
}

impl Field for GlmField {
    fn value(&self, x: f64, t: f64) -> Result<Complex64> {
        glm_reconstruct(&self.data, x, t)
    }

    fn derivatives(&self, x: f64, t: f64) -> Option<Result<FieldDerivs>> {
        Some(match GlmSystem::new(&self.data, x, t) {
            Ok(None) => Ok(FieldDerivs {
                value: Complex64::new(0.0, 0.0),
                dx: Complex64::new(0.0, 0.0),
                dxx: Complex64::new(0.0, 0.0),
                dt: Complex64::new(0.0, 0.0),
            }),
            Ok(Some(sys)) => sys
                .derivatives()
                .ok_or_else(|| Error::DegenerateData(format!("singular GLM system at X = {x}, T = {t}"))),
            Err(e) => Err(e),
        })
    }
}
