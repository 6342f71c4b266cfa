//! Normalized cumulative count of ones and the ramp-phase fit used to
//! characterize dynamic-threshold runs.

use serde::Serialize;

use super::fit::{fit_derivative, quadratic_fit, QuadraticFit};
use super::StatsError;
use crate::bits::BitSeq;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeCurve {
    /// Normalized time `i / (N - 1)`.
    pub t: Vec<f64>,
    /// Running count of ones divided by the total count of ones.
    pub values: Vec<f64>,
}

impl CumulativeCurve {
    /// `step,t,cc` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,t,cc\n");
        for (i, (t, v)) in self.t.iter().zip(&self.values).enumerate() {
            out.push_str(&format!("{i},{t},{v}\n"));
        }
        out
    }
}

pub fn cumulative_count_curve(bits: &[f64]) -> Result<CumulativeCurve, StatsError> {
    if let Some((index, value)) = bits.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
        return Err(StatsError::NotBinary {
            index,
            value: value.to_string(),
        });
    }
    let total: f64 = bits.iter().sum();
    if total == 0.0 {
        return Err(StatsError::NoOnes);
    }
    let span = (bits.len().max(2) - 1) as f64;
    let mut running = 0.0;
    let values = bits
        .iter()
        .map(|b| {
            running += b;
            running / total
        })
        .collect();
    let t = (0..bits.len()).map(|i| i as f64 / span).collect();
    Ok(CumulativeCurve { t, values })
}

/// Cumulative-count curve of a run plus a quadratic fit over its ramp
/// phase: steps `0..=window_end`, where `window_end` is the first step at
/// which the threshold reaches `max_threshold` (or the final step if it
/// never does), with time renormalized to `[0, 1]` across that window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampAnalysis {
    #[serde(skip)]
    pub curve: CumulativeCurve,
    pub saturation_step: Option<usize>,
    pub window_end: usize,
    pub fit: QuadraticFit,
    pub derivative_slope: f64,
    pub derivative_intercept: f64,
    pub ones_after_window: u64,
}

pub fn ramp_phase_analysis(
    bits: &BitSeq,
    thresholds: &[u32],
    max_threshold: u32,
) -> Result<RampAnalysis, StatsError> {
    if bits.len() != thresholds.len() {
        return Err(StatsError::LengthMismatch(bits.len(), thresholds.len()));
    }
    let curve = cumulative_count_curve(&bits.to_f64())?;
    let saturation_step = thresholds.iter().position(|&t| t == max_threshold);
    let window_end = saturation_step.unwrap_or(bits.len() - 1);
    if window_end < 2 {
        return Err(StatsError::DegenerateDesign(window_end + 1));
    }
    let t: Vec<f64> = (0..=window_end)
        .map(|i| i as f64 / window_end as f64)
        .collect();
    let fit = quadratic_fit(&t, &curve.values[..=window_end])?;
    let (derivative_slope, derivative_intercept) = fit_derivative(&fit);
    let ones_after_window = (window_end + 1..bits.len())
        .filter(|&i| bits.get(i))
        .count() as u64;
    Ok(RampAnalysis {
        curve,
        saturation_step,
        window_end,
        fit,
        derivative_slope,
        derivative_intercept,
        ones_after_window,
    })
}
