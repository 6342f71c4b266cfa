//! Least-squares quadratic fits.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::StatsError;

/// `c2 * t^2 + c1 * t + c0` with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub r_squared: f64,
}

impl QuadraticFit {
    pub fn eval(&self, t: f64) -> f64 {
        (self.c2 * t + self.c1) * t + self.c0
    }
}

/// Ordinary least squares of `v` against `[t^2, t, 1]`, solved by SVD.
pub fn quadratic_fit(t: &[f64], v: &[f64]) -> Result<QuadraticFit, StatsError> {
    if t.len() != v.len() {
        return Err(StatsError::LengthMismatch(t.len(), v.len()));
    }
    let mut distinct: Vec<f64> = t.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(StatsError::DegenerateDesign(distinct.len()));
    }
    let design = DMatrix::from_fn(t.len(), 3, |r, c| match c {
        0 => t[r] * t[r],
        1 => t[r],
        _ => 1.0,
    });
    let rhs = DVector::from_column_slice(v);
    let coeffs = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| StatsError::DegenerateDesign(distinct.len()))?;
    let fit = QuadraticFit {
        c2: coeffs[0],
        c1: coeffs[1],
        c0: coeffs[2],
        r_squared: 0.0,
    };
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let ss_tot: f64 = v.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = t
        .iter()
        .zip(v)
        .map(|(&x, &y)| (y - fit.eval(x)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(QuadraticFit { r_squared, ..fit })
}

/// Derivative `2 c2 t + c1` as `(slope, intercept)`.
pub fn fit_derivative(fit: &QuadraticFit) -> (f64, f64) {
    (2.0 * fit.c2, fit.c1)
}
