//! Exact solutions: traveling elliptic waves of `iχ_τ + h₀|χ|²χ = χ_ξξ`,
//! one- and two-solitons of the focusing standard form, and the nonlinear
//! Airy soliton.

pub mod example3;
pub mod painleve;
pub mod standard;
pub mod traveling;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::ComplexField;
use crate::scattering::Branch;

pub use example3::{Example3Form, Example3Params, Example3Solution};
pub use painleve::{painleve_profile, PainleveFit, PainleveProfile};
pub use standard::{one_soliton, two_soliton, OneSoliton, TwoSoliton};
pub use traveling::{bright, breather, traveling_wave, Profile, TravelingWave, WaveParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Family {
    Bright,
    Dark,
    Cn,
    Dn,
    OneSoliton,
    TwoSoliton,
    Breather,
    Painleve2,
}

/// The equation an exact solution satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SolvedEquation {
    /// `iχ_τ + h₀|χ|²χ = χ_ξξ`
    Autonomous { h0: f64 },
    /// `iΨ_T + Ψ_XX ± 2|Ψ|²Ψ = 0`
    Standard { branch: Branch },
    /// The linear-potential equation of the Airy soliton.
    Example3,
}

#[derive(Clone)]
pub struct AutonomousSolution {
    pub family: Family,
    pub equation: SolvedEquation,
    pub field: ComplexField,
}

impl std::fmt::Debug for AutonomousSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AutonomousSolution")
            .field("family", &self.family)
            .field("equation", &self.equation)
            .finish()
    }
}

/// Parameters accepted by [`build_solution`]; irrelevant fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionParams {
    pub wave: WaveParams,
    /// Bright amplitude; when set it overrides `g0`.
    pub amplitude: Option<f64>,
    pub example3: Example3Params,
    pub zeta_min: f64,
}

impl Default for SolutionParams {
    fn default() -> Self {
        Self {
            wave: WaveParams {
                y: 0.0,
                g0: 1.0,
                h0: -2.0,
                c0: 0.0,
                phi: 0.0,
            },
            amplitude: None,
            example3: Example3Params::default(),
            zeta_min: -60.0,
        }
    }
}

pub fn build_solution(family: Family, p: &SolutionParams) -> Result<AutonomousSolution> {
    let autonomous = |w: TravelingWave| AutonomousSolution {
        family,
        equation: SolvedEquation::Autonomous { h0: w.params.h0 },
        field: Arc::new(w),
    };
    let w = p.wave;
    Ok(match family {
        Family::Bright => match p.amplitude {
            Some(a) => autonomous(bright(a, w.h0, w.y, w.phi)?),
            None => autonomous(traveling_wave(Profile::Bright, w)?),
        },
        Family::Dark => autonomous(traveling_wave(Profile::Dark, w)?),
        Family::Cn => autonomous(traveling_wave(Profile::Cn, w)?),
        Family::Dn => autonomous(traveling_wave(Profile::Dn, w)?),
        Family::Breather => autonomous(breather(w.g0, w.h0, w.phi)?),
        Family::OneSoliton => AutonomousSolution {
            family,
            equation: SolvedEquation::Standard {
                branch: Branch::Focusing,
            },
            field: Arc::new(OneSoliton),
        },
        Family::TwoSoliton => AutonomousSolution {
            family,
            equation: SolvedEquation::Standard {
                branch: Branch::Focusing,
            },
            field: Arc::new(TwoSoliton),
        },
        Family::Painleve2 => AutonomousSolution {
            family,
            equation: SolvedEquation::Example3,
            field: Arc::new(Example3Solution::new(
                p.example3,
                Example3Form::LinearPotential,
                p.zeta_min,
            )?),
        },
    })
}
