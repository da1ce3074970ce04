//! Canonical transformations of nonautonomous nonlinear Schrödinger equations
//! with quadratic Hamiltonians to the autonomous NLS, exact solution families,
//! and numerical verification of every step.

pub mod chareq;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod field;
pub mod numerics;
pub mod riccati;
pub mod scattering;
pub mod solutions;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
