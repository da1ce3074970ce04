//! Error norms between sampled fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSamples;

use super::report::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldComparison {
    pub sup_norm: f64,
    /// `(Δx Σ |f₁ − f₂|²)^{1/2}` over every sample.
    pub l2_norm: f64,
    /// `‖f₁ − f₂‖ / ‖f₂‖`.
    pub relative_l2: f64,
    pub argmax: Point,
}

/// Differences `f1 − f2` on a common grid.
pub fn compare_fields(f1: &FieldSamples, f2: &FieldSamples) -> Result<FieldComparison> {
    if f1.xs != f2.xs || f1.ts != f2.ts || f1.values.len() != f2.values.len() {
        return Err(Error::ShapeMismatch(format!(
            "grids differ: {}x{} against {}x{}",
            f1.xs.len(),
            f1.ts.len(),
            f2.xs.len(),
            f2.ts.len()
        )));
    }
    let nx = f1.xs.len();
    let dx = if nx > 1 { (f1.xs[nx - 1] - f1.xs[0]) / (nx - 1) as f64 } else { 1.0 };
    let (mut sup, mut k_max, mut diff2, mut ref2) = (0.0f64, 0usize, 0.0, 0.0);
    for (k, (a, b)) in f1.values.iter().zip(&f2.values).enumerate() {
        let d = (a - b).norm();
        if d > sup {
            sup = d;
            k_max = k;
        }
        diff2 += d * d;
        ref2 += b.norm_sqr();
    }
    let argmax = if nx == 0 {
        Point { x: f64::NAN, t: f64::NAN }
    } else {
        Point {
            x: f1.xs[k_max % nx],
            t: f1.ts[k_max / nx],
        }
    };
    Ok(FieldComparison {
        sup_norm: sup,
        l2_norm: (dx * diff2).sqrt(),
        relative_l2: if ref2 > 0.0 { (diff2 / ref2).sqrt() } else if diff2 == 0.0 { 0.0 } else { f64::INFINITY },
        argmax,
    })
}
