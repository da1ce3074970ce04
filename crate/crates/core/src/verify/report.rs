//! Grids and residual reports.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform tensor grid `x0 + i·dx`, `t0 + j·dt` with both end points included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

impl Grid2D {
    pub const MIN_NX: usize = 16;
    pub const MIN_NT: usize = 8;

    pub fn new(x0: f64, x1: f64, nx: usize, t0: f64, t1: f64, nt: usize) -> Result<Self> {
        let g = Self {
            x0,
            x1,
            nx,
            t0,
            t1,
            nt,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x0, self.x1, self.t0, self.t1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("grid bounds must be finite".into()));
        }
        if self.nx < Self::MIN_NX || self.nt < Self::MIN_NT {
            return Err(Error::InvalidParameter(format!(
                "grid needs nx >= {} and nt >= {}, got nx = {}, nt = {}",
                Self::MIN_NX,
                Self::MIN_NT,
                self.nx,
                self.nt
            )));
        }
        if !(self.x1 > self.x0) || !(self.t1 > self.t0) {
            return Err(Error::InvalidParameter(
                "grid needs x1 > x0 and t1 > t0".into(),
            ));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        if self.nt > 1 {
            (self.t1 - self.t0) / (self.nt - 1) as f64
        } else {
            0.0
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.x1
        } else {
            self.x0 + i as f64 * self.dx()
        }
    }

    pub fn t(&self, j: usize) -> f64 {
        if j + 1 == self.nt {
            self.t1
        } else {
            self.t0 + j as f64 * self.dt()
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|j| self.t(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{},{}:{}:{}",
            self.x0, self.x1, self.nx, self.t0, self.t1, self.nt
        )
    }
}

impl std::str::FromStr for Grid2D {
    type Err = Error;

    /// Parses `x0:x1:nx,t0:t1:nt`. Grids with fewer points than the residual
    /// minimum are accepted here (output-only use); residual evaluators re-check.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("grid `{s}` is not of the form x0:x1:nx,t0:t1:nt"));
        let (xs, ts) = s.split_once(',').ok_or_else(bad)?;
        let axis = |p: &str| -> Result<(f64, f64, usize)> {
            let parts: Vec<&str> = p.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
            let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
            let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
            Ok((a, b, n))
        };
        let (x0, x1, nx) = axis(xs)?;
        let (t0, t1, nt) = axis(ts)?;
        if nx < 1 || nt < 1 || !(x1 >= x0) || !(t1 >= t0) || !x0.is_finite() || !x1.is_finite() || !t0.is_finite() || !t1.is_finite() {
            return Err(bad());
        }
        if (nx > 1 && x1 == x0) || (nt > 1 && t1 == t0) {
            return Err(bad());
        }
        Ok(Self {
            x0,
            x1,
            nx,
            t0,
            t1,
            nt,
        })
    }
}

/// Summary of a set of sample times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSamples {
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

impl TimeSamples {
    pub fn of(times: &[f64]) -> Self {
        let t0 = times.iter().copied().fold(f64::INFINITY, f64::min);
        let t1 = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            t0,
            t1,
            nt: times.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sampling {
    Grid(Grid2D),
    Times(TimeSamples),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AnalyticDerivatives,
    Central6,
    Central4,
    Spectral,
    /// Identity checked pointwise without differentiation.
    Direct,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::AnalyticDerivatives => "analytic_derivatives",
            Method::Central6 => "central6",
            Method::Central4 => "central4",
            Method::Spectral => "spectral",
            Method::Direct => "direct",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationNorm {
    pub name: String,
    pub sup_norm: f64,
    pub worst_point: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub worst_point: Point,
    pub method: Method,
    pub grid: Sampling,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_equation: Vec<EquationNorm>,
}

impl ResidualReport {
    /// Builds a report from pointwise magnitudes `(x, t, |r|)`; `weight` is the
    /// measure attached to each sample in the discrete L2 norm.
    pub(crate) fn from_samples(
        samples: &[(f64, f64, f64)],
        weight: f64,
        method: Method,
        grid: Sampling,
    ) -> Self {
        let mut sup = f64::NEG_INFINITY;
        let mut worst = Point { x: 0.0, t: 0.0 };
        let mut sq = 0.0;
        for &(x, t, r) in samples {
            if r > sup || r.is_nan() {
                sup = r;
                worst = Point { x, t };
                if r.is_nan() {
                    break;
                }
            }
            sq += r * r;
        }
        Self {
            sup_norm: if samples.is_empty() { 0.0 } else { sup },
            l2_norm: (sq * weight).sqrt(),
            worst_point: worst,
            method,
            grid,
            per_equation: Vec::new(),
        }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.sup_norm.is_finite() && self.sup_norm <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid2D = "-10:10:401,0:1:11".parse().unwrap();
        assert_eq!((g.nx, g.nt), (401, 11));
        assert!((g.dx() - 0.05).abs() < 1e-15);
        assert_eq!(g.x(400), 10.0);
        assert!("1:2:3".parse::<Grid2D>().is_err());
        assert!("0:1:x,0:1:3".parse::<Grid2D>().is_err());
        assert!("1:0:10,0:1:3".parse::<Grid2D>().is_err());
        assert!(Grid2D::new(0.0, 1.0, 8, 0.0, 1.0, 8).is_err());
    }

    #[test]
    fn report_json_schema() {
        let g = Grid2D::new(-1.0, 1.0, 16, 0.0, 1.0, 8).unwrap();
        let r = ResidualReport::from_samples(
            &[(0.0, 0.5, 1e-9), (0.5, 0.5, 3e-9)],
            1.0,
            Method::Central6,
            Sampling::Grid(g),
        );
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["sup_norm"], 3e-9);
        assert_eq!(v["worst_point"]["x"], 0.5);
        assert_eq!(v["method"], "central6");
        assert_eq!(v["grid"]["nx"], 16);
        assert!(v.get("per_equation").is_none());
    }
}
