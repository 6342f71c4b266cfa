//! Normalized cross- and auto-correlation over a finite window.
//!
//! For lag `f` the numerator sums `(x(n) - x̄)(y(n+f) - ȳ)` over every `n`
//! with both indices inside the sequence, while the means and the two norms
//! in the denominator are taken over the full sequences. At large `|f|` the
//! overlap shrinks, so `|R|` drops below 1 even for shifted copies.
//!
//! Two evaluation paths are provided: a direct floating-point path for
//! arbitrary real sequences and an exact-count path for bit sequences that
//! uses popcounts and integer arithmetic up to the final division.

use serde::Serialize;

use super::StatsError;
use crate::bits::BitSeq;

/// Real-valued sequence with its full-length mean and centered norm cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    samples: Vec<f64>,
    centered: Vec<f64>,
    sum_sq: f64,
}

impl Sequence {
    pub fn new(samples: Vec<f64>) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let centered: Vec<f64> = samples.iter().map(|v| v - mean).collect();
        let sum_sq = centered.iter().map(|c| c * c).sum();
        Self {
            samples,
            centered,
            sum_sq,
        }
    }

    pub fn from_bits(bits: &BitSeq) -> Self {
        Self::new(bits.to_f64())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Result of a lag scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub lags: Vec<i64>,
    pub values: Vec<f64>,
    pub max_abs_lag: i64,
    pub max_abs_value: f64,
}

impl CorrelationReport {
    fn from_pairs(pairs: Vec<(i64, f64)>, skip_zero: bool) -> Self {
        let peak = peak_of(
            pairs
                .iter()
                .copied()
                .filter(|&(f, _)| !(skip_zero && f == 0)),
        )
        .unwrap_or(Peak { lag: 0, value: 0.0 });
        let (lags, values) = pairs.into_iter().unzip();
        Self {
            lags,
            values,
            max_abs_lag: peak.lag,
            max_abs_value: peak.value,
        }
    }

    pub fn peak(&self) -> Peak {
        Peak {
            lag: self.max_abs_lag,
            value: self.max_abs_value,
        }
    }

    /// `lag,value` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,value\n");
        for (f, v) in self.lags.iter().zip(&self.values) {
            out.push_str(&format!("{f},{v:e}\n"));
        }
        out
    }
}

/// Signed correlation of greatest magnitude and the lag where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub lag: i64,
    pub value: f64,
}

// Ties go to the smaller |lag|, then to the negative lag.
fn peak_of(pairs: impl Iterator<Item = (i64, f64)>) -> Option<Peak> {
    pairs.fold(None, |best: Option<Peak>, (lag, value)| {
        let better = match best {
            None => true,
            Some(b) => {
                let (a, c) = (value.abs(), b.value.abs());
                a > c || (a == c && (lag.unsigned_abs(), lag) < (b.lag.unsigned_abs(), b.lag))
            }
        };
        if better {
            Some(Peak { lag, value })
        } else {
            best
        }
    })
}

/// Largest default scan: `min(1000, N / 10)`.
pub fn default_max_lag(len: usize) -> usize {
    (len / 10).min(1000)
}

fn check_lag(len: usize, lag: i64) -> Result<(), StatsError> {
    if len < 2 {
        return Err(StatsError::TooShort(len));
    }
    let max = len as i64 - 2;
    if lag.abs() > max {
        return Err(StatsError::LagOutOfRange { lag, max });
    }
    Ok(())
}

fn check_pair(x_len: usize, y_len: usize) -> Result<(), StatsError> {
    if x_len != y_len {
        return Err(StatsError::LengthMismatch(x_len, y_len));
    }
    if x_len < 2 {
        return Err(StatsError::TooShort(x_len));
    }
    Ok(())
}

fn overlap_sum(x: &[f64], y: &[f64], lag: i64) -> f64 {
    let len = x.len();
    let shift = lag.unsigned_abs() as usize;
    let (xs, ys) = if lag >= 0 {
        (&x[..len - shift], &y[shift..])
    } else {
        (&x[shift..], &y[..len - shift])
    };
    let mut acc = 0.0;
    for (a, b) in xs.iter().zip(ys) {
        acc += a * b;
    }
    acc
}

/// Cross-correlation of `x` and `y` at lag `f` (`y` advanced by `f`).
pub fn cross_correlation(x: &Sequence, y: &Sequence, lag: i64) -> Result<f64, StatsError> {
    check_pair(x.len(), y.len())?;
    check_lag(x.len(), lag)?;
    if x.sum_sq == 0.0 {
        return Err(StatsError::ZeroVariance { operand: "x" });
    }
    if y.sum_sq == 0.0 {
        return Err(StatsError::ZeroVariance { operand: "y" });
    }
    Ok(overlap_sum(&x.centered, &y.centered, lag) / (x.sum_sq * y.sum_sq).sqrt())
}

/// Auto-correlation of `x` at lag `f`; exactly 1 at lag 0.
pub fn auto_correlation(x: &Sequence, lag: i64) -> Result<f64, StatsError> {
    check_lag(x.len(), lag)?;
    if x.sum_sq == 0.0 {
        return Err(StatsError::ZeroVariance { operand: "x" });
    }
    if lag == 0 {
        return Ok(1.0);
    }
    Ok(overlap_sum(&x.centered, &x.centered, lag) / x.sum_sq)
}

fn lag_range(max_lag: usize) -> impl Iterator<Item = i64> {
    let m = max_lag as i64;
    -m..=m
}

/// Cross-correlation at every lag in `[-max_lag, max_lag]`.
pub fn cross_correlation_report(
    x: &Sequence,
    y: &Sequence,
    max_lag: usize,
) -> Result<CorrelationReport, StatsError> {
    let pairs = lag_range(max_lag)
        .map(|f| cross_correlation(x, y, f).map(|v| (f, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorrelationReport::from_pairs(pairs, false))
}

/// Auto-correlation at every lag in `[-max_lag, max_lag]`; the peak
/// excludes lag 0.
pub fn auto_correlation_report(
    x: &Sequence,
    max_lag: usize,
) -> Result<CorrelationReport, StatsError> {
    let pairs = lag_range(max_lag)
        .map(|f| auto_correlation(x, f).map(|v| (f, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorrelationReport::from_pairs(pairs, true))
}

pub fn max_abs_cross_correlation(
    x: &Sequence,
    y: &Sequence,
    max_lag: usize,
) -> Result<Peak, StatsError> {
    cross_correlation_report(x, y, max_lag).map(|r| r.peak())
}

/// Strongest auto-correlation at a non-zero lag.
pub fn max_abs_auto_correlation(x: &Sequence, max_lag: usize) -> Result<Peak, StatsError> {
    if max_lag == 0 {
        return Err(StatsError::LagOutOfRange { lag: 0, max: 0 });
    }
    auto_correlation_report(x, max_lag).map(|r| r.peak())
}

/// Bit sequence prepared for exact-count correlation.
#[derive(Debug, Clone)]
pub struct BinarySequence<'a> {
    bits: &'a BitSeq,
    ones: u64,
    // prefix[i] = ones in words[..i]
    prefix: Vec<u64>,
}

impl<'a> BinarySequence<'a> {
    pub fn new(bits: &'a BitSeq) -> Self {
        let mut prefix = Vec::with_capacity(bits.words().len() + 1);
        let mut acc = 0u64;
        prefix.push(0);
        for w in bits.words() {
            acc += w.count_ones() as u64;
            prefix.push(acc);
        }
        Self {
            bits,
            ones: acc,
            prefix,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> u64 {
        self.ones
    }

    /// Ones in bit positions `[0, end)`.
    fn ones_before(&self, end: usize) -> u64 {
        let (q, r) = (end / 64, end % 64);
        let partial = if r == 0 {
            0
        } else {
            (self.bits.words()[q] & ((1u64 << r) - 1)).count_ones() as u64
        };
        self.prefix[q] + partial
    }

    fn word_at(&self, start: usize) -> u64 {
        let words = self.bits.words();
        let (q, r) = (start / 64, start % 64);
        let lo = words.get(q).copied().unwrap_or(0);
        if r == 0 {
            lo
        } else {
            let hi = words.get(q + 1).copied().unwrap_or(0);
            (lo >> r) | (hi << (64 - r))
        }
    }

    // sum over n of x(n) * y(n + shift), shift >= 0
    fn product_count(x: &Self, y: &Self, shift: usize) -> u64 {
        x.bits
            .words()
            .iter()
            .enumerate()
            .map(|(i, &w)| (w & y.word_at(i * 64 + shift)).count_ones() as u64)
            .sum()
    }

    fn variance_scaled(&self) -> i128 {
        // N * sum (x - mean)^2 = ones * (N - ones)
        self.ones as i128 * (self.len() as i128 - self.ones as i128)
    }

    // N^2 * sum over the overlap of (x(n) - x̄)(y(n + lag) - ȳ), exact.
    fn centered_numerator(x: &Self, y: &Self, lag: i64) -> i128 {
        let len = x.len();
        let shift = lag.unsigned_abs() as usize;
        let overlap = (len - shift) as i128;
        let (sxy, sx_ov, sy_ov) = if lag >= 0 {
            (
                Self::product_count(x, y, shift),
                x.ones_before(len - shift),
                y.ones - y.ones_before(shift),
            )
        } else {
            (
                Self::product_count(y, x, shift),
                x.ones - x.ones_before(shift),
                y.ones_before(len - shift),
            )
        };
        let n = len as i128;
        let (sx, sy) = (x.ones as i128, y.ones as i128);
        n * n * sxy as i128 - n * sy * sx_ov as i128 - n * sx * sy_ov as i128 + overlap * sx * sy
    }
}

/// Exact-count equivalent of [`cross_correlation`] for bit sequences.
pub fn binary_cross_correlation(
    x: &BinarySequence<'_>,
    y: &BinarySequence<'_>,
    lag: i64,
) -> Result<f64, StatsError> {
    check_pair(x.len(), y.len())?;
    check_lag(x.len(), lag)?;
    let (vx, vy) = (x.variance_scaled(), y.variance_scaled());
    if vx == 0 {
        return Err(StatsError::ZeroVariance { operand: "x" });
    }
    if vy == 0 {
        return Err(StatsError::ZeroVariance { operand: "y" });
    }
    let num = BinarySequence::centered_numerator(x, y, lag) as f64;
    Ok(num / (x.len() as f64 * (vx as f64 * vy as f64).sqrt()))
}

/// Exact-count equivalent of [`auto_correlation`] for bit sequences.
pub fn binary_auto_correlation(x: &BinarySequence<'_>, lag: i64) -> Result<f64, StatsError> {
    check_lag(x.len(), lag)?;
    let vx = x.variance_scaled();
    if vx == 0 {
        return Err(StatsError::ZeroVariance { operand: "x" });
    }
    if lag == 0 {
        return Ok(1.0);
    }
    let num = BinarySequence::centered_numerator(x, x, lag) as f64;
    Ok(num / (x.len() as f64 * vx as f64))
}

pub fn binary_cross_report(
    x: &BinarySequence<'_>,
    y: &BinarySequence<'_>,
    max_lag: usize,
) -> Result<CorrelationReport, StatsError> {
    let pairs = lag_range(max_lag)
        .map(|f| binary_cross_correlation(x, y, f).map(|v| (f, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorrelationReport::from_pairs(pairs, false))
}

pub fn binary_auto_report(
    x: &BinarySequence<'_>,
    max_lag: usize,
) -> Result<CorrelationReport, StatsError> {
    if max_lag == 0 {
        return Err(StatsError::LagOutOfRange { lag: 0, max: 0 });
    }
    let pairs = lag_range(max_lag)
        .map(|f| binary_auto_correlation(x, f).map(|v| (f, v)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorrelationReport::from_pairs(pairs, true))
}

/// Periodic correlation of the ±1 images of two bit sequences of equal
/// length `N`: `(1/N) Σ (-1)^(x(n) ⊕ y((n+f) mod N))`. For two shifts of an
/// m-sequence this is 1 at the aligning lag and `-1/N` everywhere else.
pub fn periodic_bipolar_correlation(x: &BitSeq, y: &BitSeq, lag: i64) -> Result<f64, StatsError> {
    check_pair(x.len(), y.len())?;
    let len = x.len() as i64;
    let shift = lag.rem_euclid(len) as usize;
    let agreements = (0..x.len())
        .filter(|&n| x.get(n) == y.get((n + shift) % x.len()))
        .count() as i64;
    Ok((2 * agreements - len) as f64 / len as f64)
}
