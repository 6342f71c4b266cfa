//! XOR tap networks deriving m-bit samples from the shared register.
//!
//! Each output bit of an m-bit sample is the XOR of a set of flip-flops.
//! Two tap sets with the same gap pattern produce the same bit sequence up
//! to a time shift, so every tap set feeding the comparators must have a
//! distinct gap pattern.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bits::BitSeq;
use crate::gf2::Gf2Poly;
use crate::lfsr::{primitive_polynomial, Lfsr, MAX_LFSR_DEGREE};

const MAX_TAP_POSITION: u32 = MAX_LFSR_DEGREE;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TapError {
    #[error("tap set is empty")]
    Empty,
    #[error("tap positions must be strictly increasing, got {0:?}")]
    NotIncreasing(Vec<u32>),
    #[error("tap position 0 is invalid; positions are 1-based")]
    ZeroPosition,
    #[error("tap position {position} exceeds register degree {degree}")]
    TapOutOfRange { position: u32, degree: u32 },
    #[error("cannot parse tap set {0:?}")]
    Parse(String),
    #[error(
        "tap sets {first} and {second} are shift-equivalent \
         (stream {first_stream} bit {first_bit}, stream {second_stream} bit {second_bit})"
    )]
    ShiftEquivalent {
        first: TapSet,
        second: TapSet,
        first_stream: usize,
        first_bit: usize,
        second_stream: usize,
        second_bit: usize,
    },
    #[error(
        "requested {requested} tap sets but only {available} distinct gap patterns \
         exist for n = {n}, k = {k}"
    )]
    CapacityExceeded {
        requested: u128,
        available: u128,
        n: u32,
        k: u32,
    },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("sample width {0} is outside 1..=32")]
    WidthOutOfRange(usize),
}

/// Strictly increasing list of 1-based flip-flop positions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TapSet {
    positions: Vec<u32>,
}

impl TapSet {
    pub fn new(positions: Vec<u32>) -> Result<Self, TapError> {
        if positions.is_empty() {
            return Err(TapError::Empty);
        }
        if positions[0] == 0 {
            return Err(TapError::ZeroPosition);
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TapError::NotIncreasing(positions));
        }
        if let Some(&position) = positions.last().filter(|&&p| p > MAX_TAP_POSITION) {
            return Err(TapError::TapOutOfRange {
                position,
                degree: MAX_TAP_POSITION,
            });
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn max_position(&self) -> u32 {
        *self.positions.last().expect("tap sets are nonempty")
    }

    /// Re-anchors the set so its smallest position is 1.
    pub fn normalize(&self) -> TapSet {
        let shift = self.positions[0] - 1;
        TapSet {
            positions: self.positions.iter().map(|p| p - shift).collect(),
        }
    }

    pub fn is_shift_equivalent(&self, other: &TapSet) -> bool {
        self.normalize() == other.normalize()
    }

    /// Register mask with bit `p - 1` set for each position `p`.
    pub fn mask(&self) -> u64 {
        self.positions
            .iter()
            .fold(0u64, |acc, &p| acc | 1 << (p - 1))
    }

    /// XOR of the tapped flip-flops of a packed register word.
    #[inline]
    pub fn parity(&self, word: u64) -> bool {
        (word & self.mask()).count_ones() & 1 == 1
    }
}

impl fmt::Display for TapSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.positions.iter().map(u32::to_string).collect();
        write!(f, "{{{}}}", body.join(","))
    }
}

impl fmt::Debug for TapSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TapSet{self}")
    }
}

impl FromStr for TapSet {
    type Err = TapError;

    /// Parses `{2,11,19}`; the braces are optional.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let trimmed = text.trim();
        let inner = trimmed
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .unwrap_or(trimmed);
        let positions = inner
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| TapError::Parse(text.to_string()))?;
        TapSet::new(positions)
    }
}

impl Serialize for TapSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.positions.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TapSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let positions = Vec::<u32>::deserialize(deserializer)?;
        TapSet::new(positions).map_err(serde::de::Error::custom)
    }
}

/// The m tap sets of one output stream; `tap_sets[0]` drives the sample's
/// most significant bit. Serialized as a JSON array of tap lists; the
/// stream id is its position in the enclosing list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamConfig {
    pub stream_id: usize,
    tap_sets: Vec<TapSet>,
    masks: Vec<u64>,
}

impl StreamConfig {
    /// Builds a stream; rejects an empty list, widths above 32 bits, and
    /// any shift-equivalent pair of tap sets.
    pub fn new(stream_id: usize, tap_sets: Vec<TapSet>) -> Result<Self, TapError> {
        if tap_sets.is_empty() || tap_sets.len() > 32 {
            return Err(TapError::WidthOutOfRange(tap_sets.len()));
        }
        check_pairwise(std::iter::once((stream_id, tap_sets.as_slice())))?;
        let masks = tap_sets.iter().map(TapSet::mask).collect();
        Ok(Self {
            stream_id,
            tap_sets,
            masks,
        })
    }

    pub fn tap_sets(&self) -> &[TapSet] {
        &self.tap_sets
    }

    /// Sample width m.
    pub fn width(&self) -> usize {
        self.tap_sets.len()
    }

    pub fn max_position(&self) -> u32 {
        self.tap_sets
            .iter()
            .map(TapSet::max_position)
            .max()
            .unwrap_or(0)
    }

    /// Checks every tap against a register of the given degree.
    pub fn check_degree(&self, degree: u32) -> Result<(), TapError> {
        match self
            .tap_sets
            .iter()
            .flat_map(|t| t.positions())
            .find(|&&p| p > degree)
        {
            Some(&position) => Err(TapError::TapOutOfRange { position, degree }),
            None => Ok(()),
        }
    }

    /// Assembles the m-bit sample from a packed register word, MSB first.
    /// The caller guarantees the taps fit the register.
    #[inline]
    pub fn sample_word(&self, word: u64) -> u32 {
        self.masks
            .iter()
            .fold(0u32, |acc, &m| (acc << 1) | ((word & m).count_ones() & 1))
    }

    /// Checked sampling from a live register.
    pub fn sample_bits(&self, lfsr: &Lfsr) -> Result<u32, TapError> {
        self.check_degree(lfsr.degree())?;
        Ok(self.sample_word(lfsr.word()))
    }

    /// GF(2) rank of the tap masks. Samples are uniform over a full period
    /// only when the rank equals the width.
    pub fn rank(&self) -> usize {
        let mut basis: Vec<u64> = Vec::new();
        for &m in &self.masks {
            let mut v = m;
            for &b in &basis {
                v = v.min(v ^ b);
            }
            if v != 0 {
                basis.push(v);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        basis.len()
    }
}

impl Serialize for StreamConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.tap_sets.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StreamConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let tap_sets = Vec::<TapSet>::deserialize(deserializer)?;
        StreamConfig::new(0, tap_sets).map_err(serde::de::Error::custom)
    }
}

/// Rejects the first shift-equivalent pair found across all given streams.
pub fn check_pairwise<'a, I>(streams: I) -> Result<(), TapError>
where
    I: IntoIterator<Item = (usize, &'a [TapSet])>,
{
    let mut seen: std::collections::HashMap<TapSet, (usize, usize, &TapSet)> =
        std::collections::HashMap::new();
    for (stream, sets) in streams {
        for (bit, set) in sets.iter().enumerate() {
            if let Some(&(first_stream, first_bit, first)) = seen.get(&set.normalize()) {
                return Err(TapError::ShiftEquivalent {
                    first: first.clone(),
                    second: set.clone(),
                    first_stream,
                    first_bit,
                    second_stream: stream,
                    second_bit: bit,
                });
            }
            seen.insert(set.normalize(), (stream, bit, set));
        }
    }
    Ok(())
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of mutually non-shift-equivalent m-bit streams available from an
/// n-stage register with k taps per XOR: `floor(C(n-1, k-1) / m)`.
pub fn capacity(n: u32, k: u32, m: u32) -> Result<u128, TapError> {
    if k < 1 || k > n || m < 1 {
        return Err(TapError::InvalidParameters(format!(
            "need 1 <= k <= n and m >= 1, got n = {n}, k = {k}, m = {m}"
        )));
    }
    Ok(binomial((n - 1) as u64, (k - 1) as u64) / m as u128)
}

/// Normalized gap patterns (smallest position 1) of k taps within n stages,
/// in lexicographic order.
pub fn normalized_patterns(n: u32, k: u32) -> impl Iterator<Item = TapSet> {
    // Combinations of k - 1 positions from 2..=n, lexicographic.
    let r = (k as usize).saturating_sub(1);
    let mut current: Option<Vec<u32>> = if k >= 1 && k <= n {
        Some((2..2 + r as u32).collect())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let combo = current.take()?;
        let mut next = combo.clone();
        // advance to the next combination
        let mut i = r;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            let limit = n - (r - 1 - i) as u32;
            if next[i] < limit {
                next[i] += 1;
                for j in i + 1..r {
                    next[j] = next[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if advanced {
            current = Some(next);
        }
        let mut positions = Vec::with_capacity(k as usize);
        positions.push(1);
        positions.extend(combo);
        Some(TapSet { positions })
    })
}

/// Lag range over which [`generate_stream_configs`] keeps streams linearly
/// independent; matches the largest default lag of the correlation scan.
pub const DEFAULT_DECORRELATION_WINDOW: u32 = 1000;

/// Deterministically allocates `count` streams of `m` tap sets each from
/// the normalized gap patterns of a degree-`n` register, so that no two tap
/// sets across all streams are shift-equivalent. Selection is made against
/// the register driven by [`primitive_polynomial`]`(n)` with
/// [`DEFAULT_DECORRELATION_WINDOW`]; use [`generate_stream_configs_for`]
/// when the polynomial is known.
pub fn generate_stream_configs(
    n: u32,
    k: u32,
    m: u32,
    count: u32,
) -> Result<Vec<StreamConfig>, TapError> {
    allocate(
        n,
        primitive_polynomial(n),
        k,
        m,
        count,
        DEFAULT_DECORRELATION_WINDOW,
    )
}

/// Allocates streams for a register with characteristic polynomial `poly`.
///
/// Patterns are visited in lexicographic order. A pattern is accepted for
/// the stream being filled only if, at every relative shift of at most
/// `window` steps, the stream's tap sets together with the shifted tap sets
/// of itself or of any earlier stream stay linearly independent as
/// functions of the register state. Without this, neighbouring patterns
/// such as `{1,2,j}` and `{1,2,j+8}` make one stream's sample a
/// time-shifted copy of another's XOR a single common bit, which survives
/// the comparator as strong correlation. Once no remaining pattern
/// qualifies, the rest are taken in lexicographic order. `poly` should be
/// primitive.
pub fn generate_stream_configs_for(
    poly: Gf2Poly,
    k: u32,
    m: u32,
    count: u32,
    window: u32,
) -> Result<Vec<StreamConfig>, TapError> {
    allocate(poly.degree(), Some(poly), k, m, count, window)
}

fn allocate(
    n: u32,
    poly: Option<Gf2Poly>,
    k: u32,
    m: u32,
    count: u32,
    window: u32,
) -> Result<Vec<StreamConfig>, TapError> {
    if m > 32 {
        return Err(TapError::WidthOutOfRange(m as usize));
    }
    let available = capacity(n, k, 1)?;
    let requested = count as u128 * m as u128;
    if requested > available {
        return Err(TapError::CapacityExceeded {
            requested,
            available,
            n,
            k,
        });
    }
    let mut pool: Vec<Option<TapSet>> = normalized_patterns(n, k).map(Some).collect();
    let mut space = poly.and_then(|p| StateWindow::new(p, window as usize));
    let mut streams: Vec<Vec<TapSet>> = Vec::with_capacity(count as usize);
    for _ in 0..count {
        if let Some(w) = &mut space {
            w.start_stream();
        }
        let mut current: Vec<TapSet> = Vec::with_capacity(m as usize);
        for _ in 0..m {
            let choice = space.as_ref().and_then(|w| {
                pool.iter()
                    .position(|c| c.as_ref().is_some_and(|c| w.admits(&w.outputs(c))))
            });
            if choice.is_none() {
                space = None;
            }
            let pick = choice
                .or_else(|| pool.iter().position(Option::is_some))
                .expect("capacity checked above");
            let set = pool[pick].take().expect("slot is occupied");
            if let Some(w) = &mut space {
                let out = w.outputs(&set);
                w.accept(&out);
            }
            current.push(set);
        }
        if let Some(w) = &mut space {
            w.finish_stream();
        }
        streams.push(current);
    }
    streams
        .into_iter()
        .enumerate()
        .map(|(id, sets)| StreamConfig::new(id, sets))
        .collect()
}

/// Register states at times `0..2 * window + n` from the single-bit seed.
/// A tap set's outputs over `n` consecutive states identify it as a linear
/// function of the state, and starting `f` steps later gives the same
/// function seen `f` steps ahead.
struct StateWindow {
    states: Vec<u64>,
    n: usize,
    window: usize,
    // unshifted functions of each finished stream
    done: Vec<Basis>,
    // stream being filled: own[f] spans its rows at lags 0 and f
    own: Vec<Basis>,
    // cross[q][f + window] spans finished stream q and the current rows at lag f
    cross: Vec<Vec<Basis>>,
}

impl StateWindow {
    fn new(poly: Gf2Poly, window: usize) -> Option<Self> {
        let mut lfsr = Lfsr::new(poly, 1).ok()?;
        let n = poly.degree() as usize;
        // lags beyond the period repeat
        let window = window.min(((1u128 << n) - 2).min(usize::MAX as u128) as usize);
        let states = (0..2 * window + n)
            .map(|_| {
                let w = lfsr.word();
                lfsr.step();
                w
            })
            .collect();
        Some(Self {
            states,
            n,
            window,
            done: vec![],
            own: vec![],
            cross: vec![],
        })
    }

    fn outputs(&self, set: &TapSet) -> BitSeq {
        self.states.iter().map(|&w| set.parity(w)).collect()
    }

    fn functional(&self, outputs: &BitSeq, lag: i64) -> u64 {
        let start = (self.window as i64 + lag) as usize;
        let words = outputs.words();
        let (q, r) = (start / 64, start % 64);
        let lo = words[q] >> r;
        let hi = if r == 0 {
            0
        } else {
            words.get(q + 1).map_or(0, |w| w << (64 - r))
        };
        let v = lo | hi;
        if self.n == 64 {
            v
        } else {
            v & ((1u64 << self.n) - 1)
        }
    }

    fn lags(&self) -> std::ops::RangeInclusive<i64> {
        -(self.window as i64)..=self.window as i64
    }

    fn start_stream(&mut self) {
        self.own = vec![Basis::default(); self.window + 1];
        self.cross = self
            .done
            .iter()
            .map(|b| vec![b.clone(); 2 * self.window + 1])
            .collect();
    }

    fn admits(&self, out: &BitSeq) -> bool {
        let r0 = self.own[0].reduce(self.functional(out, 0));
        if r0 == 0 {
            return false;
        }
        let own_ok = (1..=self.window).all(|f| {
            let basis = &self.own[f];
            let a = basis.reduce(self.functional(out, 0));
            let b = basis.reduce(self.functional(out, f as i64));
            a != 0 && b != 0 && a != b
        });
        own_ok
            && self.cross.iter().all(|per_lag| {
                self.lags()
                    .zip(per_lag)
                    .all(|(f, basis)| basis.reduce(self.functional(out, f)) != 0)
            })
    }

    fn accept(&mut self, out: &BitSeq) {
        let at0 = self.functional(out, 0);
        self.own[0].insert(at0);
        for f in 1..=self.window {
            let shifted = self.functional(out, f as i64);
            self.own[f].insert(at0);
            self.own[f].insert(shifted);
        }
        let shifted: Vec<u64> = self.lags().map(|f| self.functional(out, f)).collect();
        for per_lag in &mut self.cross {
            for (basis, &v) in per_lag.iter_mut().zip(&shifted) {
                basis.insert(v);
            }
        }
    }

    fn finish_stream(&mut self) {
        let own = std::mem::take(&mut self.own);
        self.done.push(own.into_iter().next().unwrap_or_default());
    }
}

/// Echelon basis over GF(2)^64, rows kept in decreasing order of leading
/// bit so one pass reduces a vector.
#[derive(Clone, Default)]
struct Basis {
    rows: Vec<u64>,
}

impl Basis {
    fn reduce(&self, mut v: u64) -> u64 {
        for &row in &self.rows {
            let pivot = 63 - row.leading_zeros();
            if v >> pivot & 1 == 1 {
                v ^= row;
            }
        }
        v
    }

    fn insert(&mut self, v: u64) {
        let v = self.reduce(v);
        if v != 0 {
            let at = self
                .rows
                .partition_point(|&r| r.leading_zeros() < v.leading_zeros());
            self.rows.insert(at, v);
        }
    }
}
