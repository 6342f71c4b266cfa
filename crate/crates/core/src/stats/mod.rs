//! Evaluation statistics for generated bit streams.

mod correlation;
mod cumulative;
mod fit;

use thiserror::Error;

pub use correlation::{
    auto_correlation, auto_correlation_report, binary_auto_correlation, binary_auto_report,
    binary_cross_correlation, binary_cross_report, cross_correlation, cross_correlation_report,
    default_max_lag, max_abs_auto_correlation, max_abs_cross_correlation,
    periodic_bipolar_correlation, BinarySequence, CorrelationReport, Peak, Sequence,
};
pub use cumulative::{cumulative_count_curve, ramp_phase_analysis, CumulativeCurve, RampAnalysis};
pub use fit::{fit_derivative, quadratic_fit, QuadraticFit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("sequence {operand} has zero variance; correlation is undefined")]
    ZeroVariance { operand: &'static str },
    #[error("lag {lag} is outside the valid range of +/-{max}")]
    LagOutOfRange { lag: i64, max: i64 },
    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sequence of length {0} is too short")]
    TooShort(usize),
    #[error("sequence contains no ones; cumulative count cannot be normalized")]
    NoOnes,
    #[error("value {value} at index {index} is not 0 or 1")]
    NotBinary { index: usize, value: String },
    #[error("quadratic fit needs at least 3 distinct abscissae, got {0}")]
    DegenerateDesign(usize),
}
