//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// One subinterval left unresolved by adaptive quadrature: `(a, b, error estimate)`.
pub type BisectionStep = (f64, f64, f64);

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient `{name}` is not finite at t = {t}")]
    NonFiniteCoefficient { name: &'static str, t: f64 },

    #[error("coefficient a(t) vanishes at t = {t}")]
    SingularCoefficient { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{family}: parameters outside the existence region, violated {violated}")]
    Domain { family: String, violated: String },

    #[error("integration failed at t = {t_last}: {reason}")]
    IntegrationFailure { t_last: f64, reason: String },

    #[error("quadrature on [{a}, {b}] did not converge ({} unresolved subintervals)", trace.len())]
    QuadratureFailure {
        a: f64,
        b: f64,
        trace: Vec<BisectionStep>,
    },

    #[error("mu0' changes sign near s = {s}; the quadrature is singular, integrate the Riccati system directly instead")]
    SingularQuadrature { s: f64 },

    #[error("focal point at t = {t}: alpha(0) + gamma0(t) = {denominator:e}")]
    FocalPoint { t: f64, denominator: f64 },

    #[error("focal time at t = {t}: mu0 vanishes")]
    FocalTime { t: f64 },

    #[error("normalization error at t = {t}: {reason}")]
    Normalization { t: f64, reason: String },

    #[error("tau = {tau} lies outside the chart [{lo}, {hi}]")]
    OutOfChart { tau: f64, lo: f64, hi: f64 },

    #[error("degenerate kernel at t = {t}: gamma(t) = gamma(0)")]
    DegenerateKernel { t: f64 },

    #[error("non-finite field value at x = {x}, t = {t}")]
    NonFiniteField { x: f64, t: f64 },

    #[error("t = {t} is outside the trajectory domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("degenerate scattering data: {0}")]
    DegenerateData(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("Painleve II profile diverges near zeta = {zeta}")]
    Divergence { zeta: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in CLI error JSON and FFI status codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFiniteCoefficient { .. } => "non_finite_coefficient",
            Error::SingularCoefficient { .. } => "singular_coefficient",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Domain { .. } => "domain",
            Error::IntegrationFailure { .. } => "integration_failure",
            Error::QuadratureFailure { .. } => "quadrature_failure",
            Error::SingularQuadrature { .. } => "singular_quadrature",
            Error::FocalPoint { .. } => "focal_point",
            Error::FocalTime { .. } => "focal_time",
            Error::Normalization { .. } => "normalization",
            Error::OutOfChart { .. } => "out_of_chart",
            Error::DegenerateKernel { .. } => "degenerate_kernel",
            Error::NonFiniteField { .. } => "non_finite_field",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::Resolution(_) => "resolution",
            Error::DegenerateData(_) => "degenerate_data",
            Error::Unsupported(_) => "unsupported",
            Error::Divergence { .. } => "divergence",
            Error::ShapeMismatch(_) => "shape_mismatch",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
