//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::chareq::{solve_characteristic, wronskian_check, CharacteristicBasis, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::coeffs::CoefficientSet;
use crate::error::{Error, Result};
use crate::field::{ComplexField, Field, FieldSamples, Scaled};
use crate::riccati::{build_trajectory, riccati_residual, PathChoice, RiccatiState};
use crate::scattering::{flatness_residual, Branch, GlmField, ScatteringData};
use crate::solutions::{
    build_solution, painleve_profile, AutonomousSolution, Example3Params, Family, SolutionParams, SolvedEquation,
    WaveParams,
};
use crate::transform::{lift_free_propagator, lift_solution, pull_back, GreenFunction, Normalization, TransformFrame};
use crate::verify::{
    compare_fields, residual_autonomous, residual_nonautonomous, residual_standard, split_step_simulate, Grid2D,
    Method, ResidualOptions, ResidualReport, Sampling, SplitStepOptions, StencilStep, TimeSamples,
};

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "NLS_CANON_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nls-canon", version, about = "Canonical transformations of nonautonomous NLS equations")]
pub struct Cli {
    /// Cap on worker threads (falls back to NLS_CANON_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Standard solutions of the characteristic equation.
    Chareq(ChareqArgs),
    /// Riccati-system state at one time.
    Riccati(RiccatiArgs),
    /// Lift an autonomous solution to the nonautonomous equation.
    Lift(LiftArgs),
    /// Green's function values or the free-propagator comparison.
    Greens(GreensArgs),
    /// Sample an exact solution.
    Solution(SolutionArgs),
    /// Nonlinear Airy profile and tail fit.
    Painleve(PainleveArgs),
    /// Reflectionless inverse-scattering reconstruction.
    Glm(GlmArgs),
    /// Zero-curvature residual of a standard-form solution.
    Flatness(FlatnessArgs),
    /// PDE residual report.
    Residual(ResidualArgs),
    /// Split-step evolution compared with the lifted solution.
    Simulate(SimulateArgs),
    /// End-to-end checks of the worked examples.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Free,
    Harmonic,
    Exponential,
    Plasma,
    Example3,
}

/// Coefficients, frame and solution parameters shared by several subcommands.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, conflicts_with = "coeffs")]
    pub preset: Option<PresetName>,
    /// JSON coefficient file, used instead of a preset.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.5)]
    pub k: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta0: f64,
    #[arg(long, default_value_t = 0.2)]
    pub gamma0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu0: f64,
    /// g₀ of the traveling wave or of the Airy soliton [default: by family].
    #[arg(long, allow_hyphen_values = true)]
    pub g0: Option<f64>,
    /// Nonlinearity constant h₀ [default: -2, or 1 for painleve2 and 2 for dark].
    #[arg(long, allow_hyphen_values = true)]
    pub h0: Option<f64>,
    /// Integration constant C₀ of the profile [default: by family].
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    /// Bright amplitude; overrides g0.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub k0: f64,
}

impl ModelArgs {
    fn h0_for(&self, family: Option<Family>) -> f64 {
        self.h0.unwrap_or(match family {
            Some(Family::Painleve2) => 1.0,
            Some(Family::Dark) => 2.0,
            _ => crate::coeffs::DEFAULT_H0,
        })
    }

    pub fn coefficient_set(&self, family: Option<Family>) -> Result<CoefficientSet> {
        let h0 = self.h0_for(family);
        if let Some(path) = &self.coeffs {
            let set = CoefficientSet::from_json_file(path)?;
            return Ok(match self.h0 {
                Some(h) => set.with_h0(h),
                None => set,
            });
        }
        let g0 = self.g0.unwrap_or(1.0);
        let set = match self.preset.unwrap_or(PresetName::Free) {
            PresetName::Free => CoefficientSet::free_particle(),
            PresetName::Harmonic => CoefficientSet::harmonic(self.omega)?,
            PresetName::Exponential => CoefficientSet::exponential(self.k)?,
            PresetName::Plasma => CoefficientSet::plasma(self.k)?,
            PresetName::Example3 => CoefficientSet::example3(self.alpha0, self.beta0, self.gamma0, g0)?,
        };
        Ok(set.with_h0(h0))
    }

    pub fn solution_params(&self, family: Family) -> SolutionParams {
        let h0 = self.h0_for(Some(family));
        let (g0, c0) = match family {
            Family::Dark => {
                let g0 = self.g0.unwrap_or(-2.0);
                (g0, self.c0.unwrap_or(g0 * g0 / (2.0 * h0)))
            }
            Family::Cn => (self.g0.unwrap_or(1.0), self.c0.unwrap_or(0.5)),
            Family::Dn => (self.g0.unwrap_or(1.0), self.c0.unwrap_or(-0.2)),
            _ => (self.g0.unwrap_or(1.0), self.c0.unwrap_or(0.0)),
        };
        SolutionParams {
            wave: WaveParams {
                y: self.y,
                g0,
                h0,
                c0,
                phi: self.phi,
            },
            amplitude: self.amplitude,
            example3: Example3Params {
                alpha0: self.alpha0,
                beta0: self.beta0,
                gamma0: self.gamma0,
                mu0: self.mu0,
                g0,
                h0,
                k0: self.k0,
                y: self.y,
            },
            zeta_min: -60.0,
        }
    }
}

/// Initial data and construction path of a Riccati trajectory.
#[derive(Debug, Clone, Args)]
pub struct FrameArgs {
    /// Initial values mu,alpha,beta,gamma,delta,epsilon,kappa [default: 1,0,1,0,0,0,0].
    #[arg(long, value_parser = parse_init, allow_hyphen_values = true)]
    pub init: Option<RiccatiState>,
    /// Construction path [default: closed form, else composition, else integration].
    #[arg(long, value_enum)]
    pub path: Option<PathChoice>,
    #[arg(long, value_enum, default_value = "lemma1")]
    pub normalization: Normalization,
}

impl FrameArgs {
    fn init(&self) -> RiccatiState {
        self.init.unwrap_or_else(RiccatiState::identity)
    }

    fn frame(&self, set: &CoefficientSet, t_end: f64) -> Result<TransformFrame> {
        let traj = build_trajectory(set, self.init(), t_end.max(1e-3), self.path)?;
        TransformFrame::new(traj, set.h0, self.normalization)
    }
}

#[derive(Debug, Args)]
pub struct ChareqArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    /// CSV with columns t, mu0, mu0_prime, mu1, mu1_prime.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiccatiArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[arg(long)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[arg(long = "solution", value_enum, default_value = "bright")]
    pub family: Family,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Grid2D,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GreensArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    /// Compare against the lifted free propagator at quasi-random points.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y_point: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolutionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Grid2D,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PainleveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub k0: f64,
    /// Sample grid lo:hi:n.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-40:8:4801")]
    pub zeta: (f64, f64, usize),
    /// Tail-fit window lo:hi.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true, default_value = "-40:-20")]
    pub fit: (f64, f64),
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV with columns zeta, u.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GlmArgs {
    /// Comma-separated eigenvalues, e.g. 0.5i,1.5i.
    #[arg(long, value_delimiter = ',', value_parser = parse_complex, allow_hyphen_values = true)]
    pub eigenvalues: Vec<Complex64>,
    /// Comma-separated norming constants [default: -2i·Im λ for each eigenvalue].
    #[arg(long, value_delimiter = ',', value_parser = parse_complex, allow_hyphen_values = true)]
    pub norming: Vec<Complex64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Grid2D,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StandardFamily {
    OneSoliton,
    TwoSoliton,
}

#[derive(Debug, Args)]
pub struct FlatnessArgs {
    #[arg(long, value_enum, default_value = "one-soliton")]
    pub family: StandardFamily,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, default_value = "0.3")]
    pub lambda: Complex64,
    /// Multiply the field by this factor (1 leaves it a solution).
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "-10:10:201,0:1:21")]
    pub grid: Grid2D,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EquationName {
    Autonomous,
    Standard,
    Nonautonomous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StencilName {
    Capped,
    Grid,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[arg(long, value_enum, default_value = "nonautonomous")]
    pub equation: EquationName,
    #[arg(long = "solution", value_enum, default_value = "bright")]
    pub family: Family,
    #[arg(long, allow_hyphen_values = true, default_value = "-10:10:201,0:1:21")]
    pub grid: Grid2D,
    #[arg(long, value_enum, default_value = "capped")]
    pub stencil: StencilName,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[arg(long = "solution", value_enum, default_value = "bright")]
    pub family: Family,
    /// Periodic grid; the last point is one spacing short of the period.
    #[arg(long, allow_hyphen_values = true, default_value = "-32:31.96875:2048,0:0.5:11")]
    pub grid: Grid2D,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoExample {
    Harmonic,
    Exponential,
    Plasma,
    Example3,
    All,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub example: DemoExample,
    #[arg(long, default_value_t = 0.5)]
    pub k: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_init(s: &str) -> std::result::Result<RiccatiState, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != 7 {
        return Err(format!("expected 7 values mu,alpha,beta,gamma,delta,epsilon,kappa, got {}", v.len()));
    }
    RiccatiState::initial(v[0], v[1], v[2], v[3], v[4], v[5], v[6]).map_err(|e| e.to_string())
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i` and `-i`.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let t = s.trim().replace(' ', "");
    match t.as_str() {
        "i" | "+i" => return Ok(Complex64::new(0.0, 1.0)),
        "-i" => return Ok(Complex64::new(0.0, -1.0)),
        _ => {}
    }
    Complex64::from_str(&t).map_err(|_| format!("`{s}` is not a complex number"))
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let p: Vec<&str> = s.split(':').collect();
    let bad = || format!("`{s}` is not of the form lo:hi:n");
    if p.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = p[0].parse().map_err(|_| bad())?;
    let hi: f64 = p[1].parse().map_err(|_| bad())?;
    let n: usize = p[2].parse().map_err(|_| bad())?;
    if !(hi > lo) || n < 2 {
        return Err(bad());
    }
    Ok((lo, hi, n))
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("`{s}` is not of the form lo:hi"))?;
    let lo: f64 = a.parse().map_err(|_| format!("bad bound `{a}`"))?;
    let hi: f64 = b.parse().map_err(|_| format!("bad bound `{b}`"))?;
    Ok((lo, hi))
}

/// Thread cap from the flag, then the environment.
pub fn thread_cap(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag.filter(|n| *n > 0));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|n| (n > 0).then_some(n))
            .map_err(|_| Error::Parse(format!("{THREADS_ENV}=`{v}` is not a thread count"))),
        Err(_) => Ok(None),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = thread_cap(cli.threads)? {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Chareq(a) => cmd_chareq(&a, &mut out),
        Command::Riccati(a) => cmd_riccati(&a, &mut out),
        Command::Lift(a) => cmd_lift(&a, &mut out),
        Command::Greens(a) => cmd_greens(&a, &mut out),
        Command::Solution(a) => cmd_solution(&a, &mut out),
        Command::Painleve(a) => cmd_painleve(&a, &mut out),
        Command::Glm(a) => cmd_glm(&a, &mut out),
        Command::Flatness(a) => cmd_flatness(&a, &mut out),
        Command::Residual(a) => cmd_residual(&a, &mut out),
        Command::Simulate(a) => cmd_simulate(&a, &mut out),
        Command::Demo(a) => cmd_demo(&a, &mut out),
    }
}

/// `{"error": {"kind": ..., "message": ...}}`.
pub fn error_json(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn write_field_csv(samples: &FieldSamples, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let mut file;
    let w: &mut dyn Write = match path {
        Some(p) => {
            file = BufWriter::new(File::create(p)?);
            &mut file
        }
        None => out,
    };
    writeln!(w, "x,t,re,im")?;
    for (j, &t) in samples.ts.iter().enumerate() {
        for (&x, v) in samples.xs.iter().zip(samples.row(j)) {
            writeln!(w, "{x:.16e},{t:.16e},{:.16e},{:.16e}", v.re, v.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn grid_samples(field: &dyn Field, grid: &Grid2D) -> Result<FieldSamples> {
    FieldSamples::sample(field, &grid.xs(), &grid.ts())
}

fn stencil_options(s: StencilName) -> ResidualOptions {
    ResidualOptions {
        step: match s {
            StencilName::Capped => StencilStep::Capped,
            StencilName::Grid => StencilStep::Grid,
        },
        analytic: true,
    }
}

fn cmd_chareq(a: &ChareqArgs, out: &mut dyn Write) -> Result<i32> {
    let set = a.model.coefficient_set(None)?;
    let basis = solve_characteristic(&set, a.t_end, DEFAULT_RTOL, DEFAULT_ATOL)?;
    let exact = CharacteristicBasis::exact(&set);
    let n = a.samples.max(2);
    let ts: Vec<f64> = (0..n).map(|i| a.t_end * i as f64 / (n - 1) as f64).collect();
    let mut rows = Vec::with_capacity(n);
    let mut closed_err: Option<f64> = exact.as_ref().map(|_| 0.0);
    for &t in &ts {
        let b = basis.eval(t)?;
        if let (Some(e), Some(err)) = (&exact, closed_err.as_mut()) {
            let c = e.eval(t)?;
            let d = [b.mu0 - c.mu0, b.mu0_prime - c.mu0_prime, b.mu1 - c.mu1, b.mu1_prime - c.mu1_prime];
            *err = d.iter().fold(*err, |m, v| m.max(v.abs()));
        }
        rows.push(json!({"t": t, "mu0": b.mu0, "mu0_prime": b.mu0_prime, "mu1": b.mu1, "mu1_prime": b.mu1_prime}));
    }
    if let Some(p) = &a.out {
        let mut w = BufWriter::new(File::create(p)?);
        writeln!(w, "t,mu0,mu0_prime,mu1,mu1_prime")?;
        for &t in &ts {
            let b = basis.eval(t)?;
            writeln!(w, "{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", b.mu0, b.mu0_prime, b.mu1, b.mu1_prime)?;
        }
        w.flush()?;
    }
    let wronskian = wronskian_check(&basis, &ts)?;
    emit_json(
        &json!({
            "t_end": a.t_end,
            "samples": rows,
            "closed_form_max_error": closed_err,
            "wronskian": wronskian,
        }),
        None,
        out,
    )?;
    Ok(0)
}

fn cmd_riccati(a: &RiccatiArgs, out: &mut dyn Write) -> Result<i32> {
    let set = a.model.coefficient_set(None)?;
    if !(a.t >= 0.0) {
        return Err(Error::InvalidParameter(format!("t must be nonnegative, got {}", a.t)));
    }
    let traj = build_trajectory(&set, a.frame.init(), a.t.max(1e-3), a.frame.path)?;
    let s = traj.state(a.t)?;
    let residuals = if a.t > 0.0 {
        let grid: Vec<f64> = (1..=20).map(|i| a.t * i as f64 / 20.0).collect();
        Some(riccati_residual(traj.as_ref(), &grid)?)
    } else {
        None
    };
    emit_json(
        &json!({
            "t": s.t,
            "mu": s.mu,
            "alpha": s.alpha,
            "beta": s.beta,
            "gamma": s.gamma,
            "delta": s.delta,
            "epsilon": s.epsilon,
            "kappa": s.kappa,
            "trajectory": traj.label(),
            "residuals": residuals,
        }),
        None,
        out,
    )?;
    Ok(0)
}

fn check_liftable(sol: &AutonomousSolution, norm: Normalization) -> Result<()> {
    match (sol.equation, norm) {
        (SolvedEquation::Autonomous { .. }, Normalization::Lemma1) => Ok(()),
        (SolvedEquation::Standard { .. }, Normalization::Civp) => Ok(()),
        (SolvedEquation::Example3, _) => Err(Error::Unsupported(
            "painleve2 is already a solution of the nonautonomous equation; use `solution`".into(),
        )),
        _ => Err(Error::InvalidParameter(
            "lemma1 lifts traveling waves, civp lifts one_soliton/two_soliton".into(),
        )),
    }
}

/// Frame and lifted field for a model, family and time horizon.
fn lifted(model: &ModelArgs, frame: &FrameArgs, family: Family, t_end: f64) -> Result<(TransformFrame, ComplexField)> {
    let set = model.coefficient_set(Some(family))?;
    let sol = build_solution(family, &model.solution_params(family))?;
    check_liftable(&sol, frame.normalization)?;
    let frame = frame.frame(&set, t_end)?;
    if let SolvedEquation::Standard { branch } = sol.equation {
        if branch != frame.branch() {
            return Err(Error::InvalidParameter(format!(
                "{:?} solves the {branch} equation but h0 = {} selects the {} branch",
                family,
                frame.h0(),
                frame.branch()
            )));
        }
    }
    let psi: ComplexField = Arc::new(lift_solution(sol.field, &frame));
    Ok((frame, psi))
}

fn cmd_lift(a: &LiftArgs, out: &mut dyn Write) -> Result<i32> {
    let (_, psi) = lifted(&a.model, &a.frame, a.family, a.grid.t1)?;
    let samples = grid_samples(psi.as_ref(), &a.grid)?;
    write_field_csv(&samples, a.out.as_deref(), out)?;
    Ok(0)
}

/// Points of the additive recurrence with the plastic-number increments, in `[0, 1)³`.
fn quasi_random(n: usize) -> Vec<[f64; 3]> {
    let g = 1.220_744_084_605_759_5_f64;
    let inc = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)];
    (1..=n)
        .map(|i| {
            let i = i as f64;
            [(0.5 + inc[0] * i).fract(), (0.5 + inc[1] * i).fract(), (0.5 + inc[2] * i).fract()]
        })
        .collect()
}

/// Relative gaps `|G − K|/|G|` between the Green's function and the lifted free
/// propagator at `n` quasi-random points with `x, y ∈ [−3, 3]`, `t ∈ [0.05, t_max]`.
pub fn green_equivalence(frame: &TransformFrame, n: usize, t_max: f64) -> Result<ResidualReport> {
    let set = frame.coefficients();
    let basis = match CharacteristicBasis::exact(set) {
        Some(b) => b,
        None => solve_characteristic(set, t_max, 1e-12, 1e-14)?,
    };
    let green = GreenFunction::new(Arc::new(basis));
    let mut samples = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    for p in quasi_random(n) {
        let (x, y, t) = (-3.0 + 6.0 * p[0], -3.0 + 6.0 * p[1], 0.05 + (t_max - 0.05) * p[2]);
        let g = green.eval(x, y, t)?;
        let k = lift_free_propagator(frame, x, y, t)?;
        samples.push((x, t, (g - k).norm() / g.norm()));
        times.push(t);
    }
    Ok(ResidualReport::from_samples(
        &samples,
        1.0 / n as f64,
        Method::Direct,
        Sampling::Times(TimeSamples::of(&times)),
    ))
}

fn cmd_greens(a: &GreensArgs, out: &mut dyn Write) -> Result<i32> {
    let set = a.model.coefficient_set(None)?;
    if a.compare {
        let frame = a.frame.frame(&set, a.t_max)?;
        let report = green_equivalence(&frame, a.samples.max(1), a.t_max)?;
        emit_json(&report, a.report.as_deref(), out)?;
        return Ok(0);
    }
    let basis = match CharacteristicBasis::exact(&set) {
        Some(b) => b,
        None => solve_characteristic(&set, a.t, 1e-12, 1e-14)?,
    };
    let kernel = GreenFunction::new(Arc::new(basis)).kernel_at(a.t)?;
    let g = kernel.eval(a.x, a.y_point);
    emit_json(
        &json!({
            "x": a.x, "y": a.y_point, "t": a.t,
            "re": g.re, "im": g.im,
            "fundamental": kernel.fundamental,
            "caustics": kernel.caustics,
        }),
        a.report.as_deref(),
        out,
    )?;
    Ok(0)
}

fn cmd_solution(a: &SolutionArgs, out: &mut dyn Write) -> Result<i32> {
    let sol = build_solution(a.family, &a.model.solution_params(a.family))?;
    let samples = grid_samples(sol.field.as_ref(), &a.grid)?;
    write_field_csv(&samples, a.out.as_deref(), out)?;
    Ok(0)
}

fn cmd_painleve(a: &PainleveArgs, out: &mut dyn Write) -> Result<i32> {
    let (lo, hi, n) = a.zeta;
    let profile = painleve_profile(a.k0, lo.min(a.fit.0))?;
    let zs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let us = profile.sample(&zs)?;
    if let Some(p) = &a.out {
        let mut w = BufWriter::new(File::create(p)?);
        writeln!(w, "zeta,u")?;
        for (z, u) in zs.iter().zip(&us) {
            writeln!(w, "{z:.16e},{u:.16e}")?;
        }
        w.flush()?;
    }
    let fit = profile.fit(a.fit.0, a.fit.1)?;
    emit_json(
        &json!({
            "fit": fit,
            "r_relative_error": fit.r_relative_error(),
            "theta_relative_error": fit.theta_relative_error(),
        }),
        a.report.as_deref(),
        out,
    )?;
    Ok(0)
}

fn cmd_glm(a: &GlmArgs, out: &mut dyn Write) -> Result<i32> {
    let norming = if a.norming.is_empty() {
        a.eigenvalues.iter().map(|l| Complex64::new(0.0, -2.0 * l.im)).collect()
    } else {
        a.norming.clone()
    };
    let data = ScatteringData::reflectionless(a.eigenvalues.clone(), norming, a.t0)?;
    let field = GlmField::new(data)?;
    let samples = grid_samples(&field, &a.grid)?;
    write_field_csv(&samples, a.out.as_deref(), out)?;
    Ok(0)
}

fn cmd_flatness(a: &FlatnessArgs, out: &mut dyn Write) -> Result<i32> {
    let family = match a.family {
        StandardFamily::OneSoliton => Family::OneSoliton,
        StandardFamily::TwoSoliton => Family::TwoSoliton,
    };
    let sol = build_solution(family, &SolutionParams::default())?;
    let field = Scaled {
        inner: sol.field,
        factor: Complex64::new(a.scale, 0.0),
    };
    let report = flatness_residual(&field, a.lambda, Branch::Focusing, &a.grid, &ResidualOptions::default())?;
    emit_json(&report, a.report.as_deref(), out)?;
    Ok(0)
}

fn cmd_residual(a: &ResidualArgs, out: &mut dyn Write) -> Result<i32> {
    let opts = stencil_options(a.stencil);
    let params = a.model.solution_params(a.family);
    let report = match a.equation {
        EquationName::Autonomous => {
            let sol = build_solution(a.family, &params)?;
            let SolvedEquation::Autonomous { h0 } = sol.equation else {
                return Err(Error::InvalidParameter(format!("{:?} does not solve the autonomous equation", a.family)));
            };
            residual_autonomous(sol.field.as_ref(), h0, &a.grid, &opts)?
        }
        EquationName::Standard => {
            let sol = build_solution(a.family, &params)?;
            let SolvedEquation::Standard { branch } = sol.equation else {
                return Err(Error::InvalidParameter(format!("{:?} does not solve the standard form", a.family)));
            };
            residual_standard(sol.field.as_ref(), branch, &a.grid, &opts)?
        }
        EquationName::Nonautonomous if a.family == Family::Painleve2 => {
            let sol = crate::solutions::Example3Solution::new(
                params.example3,
                crate::solutions::Example3Form::LinearPotential,
                params.zeta_min,
            )?;
            let set = sol.coefficients()?;
            residual_nonautonomous(&sol, &set, &|t| Ok(sol.coupling(t)), &a.grid, &opts)?
        }
        EquationName::Nonautonomous => {
            let (frame, psi) = lifted(&a.model, &a.frame, a.family, a.grid.t1)?;
            let set = frame.coefficients().clone();
            residual_nonautonomous(psi.as_ref(), &set, &|t| frame.coupling(t), &a.grid, &opts)?
        }
    };
    emit_json(&report, a.report.as_deref(), out)?;
    Ok(0)
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let (frame, psi) = lifted(&a.model, &a.frame, a.family, a.grid.t1)?;
    let set = frame.coefficients().clone();
    let sim = split_step_simulate(&set, &|t| frame.coupling(t), psi.as_ref(), &a.grid, &SplitStepOptions { dt: a.dt })?;
    let exact = grid_samples(psi.as_ref(), &a.grid)?;
    if let Some(p) = &a.out {
        write_field_csv(&sim, Some(p), out)?;
    }
    let last = |s: &FieldSamples| FieldSamples {
        xs: s.xs.clone(),
        ts: vec![*s.ts.last().expect("grid has times")],
        values: s.row(s.ts.len() - 1).to_vec(),
    };
    let cmp = compare_fields(&sim, &exact)?;
    let final_cmp = compare_fields(&last(&sim), &last(&exact))?;
    emit_json(&json!({ "all_times": cmp, "final_time": final_cmp }), a.report.as_deref(), out)?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct DemoCheck {
    example: &'static str,
    check: &'static str,
    value: f64,
    tolerance: f64,
    pass: bool,
}

fn check(example: &'static str, check: &'static str, value: f64, tolerance: f64) -> DemoCheck {
    DemoCheck {
        example,
        check,
        value,
        tolerance,
        pass: value.is_finite() && value <= tolerance,
    }
}

/// Lifts the unit bright soliton (`h₀ = −2`) through `frame` and returns the
/// nonautonomous residual on `grid`.
fn lifted_bright_residual(frame: &TransformFrame, grid: &Grid2D) -> Result<ResidualReport> {
    let chi: ComplexField = Arc::new(crate::solutions::bright(1.0, frame.h0(), 0.0, 0.0)?);
    let psi = lift_solution(chi, frame);
    let set = frame.coefficients().clone();
    residual_nonautonomous(&psi, &set, &|t| frame.coupling(t), grid, &ResidualOptions::default())
}

fn demo_checks(ex: DemoExample, a: &DemoArgs) -> Result<Vec<DemoCheck>> {
    let grid = |t1: f64| Grid2D::new(-10.0, 10.0, 101, 0.0, t1, 13);
    let mut v = Vec::new();
    match ex {
        DemoExample::Harmonic => {
            let f = TransformFrame::clark_wint(a.omega, -2.0)?;
            let t1 = 1.2 / a.omega;
            v.push(check("harmonic", "lifted bright residual", lifted_bright_residual(&f, &grid(t1)?)?.sup_norm, 1e-6));
            v.push(check("harmonic", "green equivalence", green_equivalence(&f, 50, 1.0 / a.omega)?.sup_norm, 1e-10));
        }
        DemoExample::Exponential => {
            let set = CoefficientSet::exponential(a.k)?.with_h0(-2.0);
            let f = TransformFrame::for_coefficients(&set, RiccatiState::identity(), 1.0, Normalization::Lemma1)?;
            v.push(check("exponential", "lifted bright residual", lifted_bright_residual(&f, &grid(1.0)?)?.sup_norm, 1e-6));
            v.push(check("exponential", "green equivalence", green_equivalence(&f, 50, 1.0)?.sup_norm, 1e-10));
        }
        DemoExample::Plasma => {
            let f = TransformFrame::tappert(a.k, -2.0)?;
            v.push(check("plasma", "lifted bright residual", lifted_bright_residual(&f, &grid(1.0)?)?.sup_norm, 1e-6));
            v.push(check("plasma", "green equivalence", green_equivalence(&f, 50, 1.0)?.sup_norm, 1e-10));
            let chi: ComplexField = Arc::new(crate::solutions::bright(1.0, -2.0, 0.0, 0.0)?);
            let psi: ComplexField = Arc::new(lift_solution(chi.clone(), &f));
            let back = pull_back(psi, &f, (0.0, 1.0))?;
            let mut err: f64 = 0.0;
            for p in quasi_random(100) {
                let (xi, tau) = (-8.0 + 16.0 * p[0], -p[1]);
                err = err.max((back.value(xi, tau)? - chi.value(xi, tau)?).norm());
            }
            v.push(check("plasma", "pull_back round trip", err, 1e-12));
        }
        DemoExample::Example3 => {
            let sol = crate::solutions::Example3Solution::new(
                Example3Params::default(),
                crate::solutions::Example3Form::LinearPotential,
                -60.0,
            )?;
            let set = sol.coefficients()?;
            let g = Grid2D::new(-8.0, 8.0, 81, 0.0, 1.0, 11)?;
            let r = residual_nonautonomous(&sol, &set, &|t| Ok(sol.coupling(t)), &g, &ResidualOptions::default())?;
            v.push(check("example3", "airy soliton residual", r.sup_norm, 1e-5));
            let fit = painleve_profile(0.5, -40.0)?.fit(-40.0, -20.0)?;
            v.push(check("example3", "painleve amplitude (relative)", fit.r_relative_error(), 0.02));
        }
        DemoExample::All => {
            for e in [DemoExample::Harmonic, DemoExample::Exponential, DemoExample::Plasma, DemoExample::Example3] {
                v.extend(demo_checks(e, a)?);
            }
        }
    }
    Ok(v)
}

fn cmd_demo(a: &DemoArgs, out: &mut dyn Write) -> Result<i32> {
    let checks = demo_checks(a.example, a)?;
    writeln!(out, "{:<12} {:<32} {:>12} {:>10}  result", "example", "check", "value", "tol")?;
    for c in &checks {
        writeln!(
            out,
            "{:<12} {:<32} {:>12.3e} {:>10.1e}  {}",
            c.example,
            c.check,
            c.value,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        )?;
    }
    if let Some(p) = &a.report {
        emit_json(&checks, Some(p), out)?;
    }
    if checks.iter().all(|c| c.pass) {
        Ok(0)
    } else {
        Err(Error::Resolution(format!(
            "{} of {} demo checks failed",
            checks.iter().filter(|c| !c.pass).count(),
            checks.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5i").unwrap(), Complex64::new(0.0, 0.5));
        assert_eq!(parse_complex("0.7+0.2i").unwrap(), Complex64::new(0.7, 0.2));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.3").unwrap(), Complex64::new(0.3, 0.0));
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn init_parsing() {
        let s = parse_init("1,0.1,2,0,0,0,0").unwrap();
        assert_eq!((s.mu, s.alpha, s.beta), (1.0, 0.1, 2.0));
        assert!(parse_init("1,0,0,0,0,0,0").is_err());
        assert!(parse_init("1,2").is_err());
    }

    #[test]
    fn quasi_random_points_fill_the_cube() {
        let p = quasi_random(200);
        for k in 0..3 {
            let lo = p.iter().map(|v| v[k]).fold(1.0, f64::min);
            let hi = p.iter().map(|v| v[k]).fold(0.0, f64::max);
            assert!(lo < 0.02 && hi > 0.98);
        }
    }

    #[test]
    fn riccati_harmonic_alpha() {
        let cli = Cli::try_parse_from(["nls-canon", "riccati", "--preset", "harmonic", "--omega", "1", "--t", "0.5"]).unwrap();
        let Command::Riccati(a) = cli.command else { panic!() };
        let mut buf = Vec::new();
        cmd_riccati(&a, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert!((v["alpha"].as_f64().unwrap() + 0.25 * 0.5f64.tan()).abs() < 1e-10);
    }
}
