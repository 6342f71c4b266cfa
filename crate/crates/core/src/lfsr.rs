//! Fibonacci (external-XOR) linear feedback shift register.
//!
//! Flip-flops are numbered `1..=n` to line up with the exponents of the
//! characteristic polynomial. On each clock the tapped flip-flops (every
//! exponent except 0, so flip-flop `n` always participates) are XORed, the
//! register shifts one place away from the input, the XOR result enters
//! flip-flop 1 and the bit leaving flip-flop `n` is the output.
//!
//! ```text
//!        ┌────┐   ┌────┐   ┌────┐
//!   ┌──▶ │ q1 ├──▶│ q2 ├┬─▶│ q3 ├┬──▶ out
//!   │    └────┘   └────┘│  └────┘│
//!   └──────────────────(⊕)◀──────┘        x^3 + x^2 + 1
//! ```
//!
//! Internally flip-flop `i` lives in bit `i - 1` of a `u64`, so degrees up
//! to 64 are supported.

use thiserror::Error;

use crate::gf2::Gf2Poly;

pub const MAX_LFSR_DEGREE: u32 = 64;

/// Largest degree accepted by the brute-force [`period`] oracle.
pub const MAX_PERIOD_DEGREE: u32 = 24;

/// Production polynomial for the 32-stage register.
pub const DEFAULT_POLY_32: &str = "x^32+x^22+x^2+x+1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LfsrError {
    #[error("LFSR seed is all zeros (absorbing state)")]
    ZeroSeed,
    #[error("seed has {got} bits but the polynomial has degree {expected}")]
    WidthMismatch { expected: u32, got: u32 },
    #[error("degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooLarge { degree: u32, max: u32 },
}

/// The default degree-32 characteristic polynomial.
pub fn default_polynomial() -> Gf2Poly {
    DEFAULT_POLY_32
        .parse()
        .expect("default polynomial literal is well formed")
}

/// A fixed primitive polynomial of the given degree: the default polynomial
/// for degree 32, otherwise the first primitive polynomial in increasing
/// coefficient-mask order. `None` outside `2..=64`.
pub fn primitive_polynomial(degree: u32) -> Option<Gf2Poly> {
    if !(2..=MAX_LFSR_DEGREE).contains(&degree) {
        return None;
    }
    if degree == 32 {
        return Some(default_polynomial());
    }
    (0u128..)
        .map(|mid| Gf2Poly::from_mask((1u128 << degree) | (mid << 1) | 1))
        .find_map(|p| p.ok().filter(|p| p.is_primitive().unwrap_or(false)))
}

fn width_mask(degree: u32) -> u64 {
    if degree == 64 {
        u64::MAX
    } else {
        (1u64 << degree) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lfsr {
    poly: Gf2Poly,
    degree: u32,
    taps: u64,
    state: u64,
    steps: u64,
}

impl Lfsr {
    /// Seeds the register from an integer whose bit `i - 1` is flip-flop `i`.
    /// A seed wider than the register is a [`LfsrError::WidthMismatch`].
    pub fn new(poly: Gf2Poly, seed: u64) -> Result<Self, LfsrError> {
        let degree = poly.degree();
        if degree > MAX_LFSR_DEGREE {
            return Err(LfsrError::DegreeTooLarge {
                degree,
                max: MAX_LFSR_DEGREE,
            });
        }
        if seed & !width_mask(degree) != 0 {
            return Err(LfsrError::WidthMismatch {
                expected: degree,
                got: 64 - seed.leading_zeros(),
            });
        }
        if seed == 0 {
            return Err(LfsrError::ZeroSeed);
        }
        let taps = poly
            .feedback_taps()
            .into_iter()
            .fold(0u64, |acc, i| acc | 1 << (i - 1));
        Ok(Self {
            poly,
            degree,
            taps,
            state: seed,
            steps: 0,
        })
    }

    /// Seeds the register from explicit flip-flop values, `bits[0]` being
    /// flip-flop 1. The slice length must equal the degree.
    pub fn from_bits(poly: Gf2Poly, bits: &[bool]) -> Result<Self, LfsrError> {
        if bits.len() != poly.degree() as usize {
            return Err(LfsrError::WidthMismatch {
                expected: poly.degree(),
                got: bits.len() as u32,
            });
        }
        let seed = bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
        Self::new(poly, seed)
    }

    pub fn polynomial(&self) -> Gf2Poly {
        self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Register contents packed as flip-flop `i` -> bit `i - 1`.
    pub fn word(&self) -> u64 {
        self.state
    }

    /// Value of flip-flop `i` (1-based).
    pub fn bit(&self, i: u32) -> bool {
        assert!((1..=self.degree).contains(&i), "flip-flop {i} out of range");
        self.state >> (i - 1) & 1 == 1
    }

    /// Flip-flop values in index order 1..=n.
    pub fn bits(&self) -> Vec<bool> {
        (1..=self.degree).map(|i| self.bit(i)).collect()
    }

    pub fn step_count(&self) -> u64 {
        self.steps
    }

    /// Clocks the register once and returns the bit shifted out of
    /// flip-flop `n`.
    #[inline]
    pub fn step(&mut self) -> bool {
        let feedback = (self.state & self.taps).count_ones() & 1;
        let out = self.state >> (self.degree - 1) & 1 == 1;
        self.state = ((self.state << 1) | feedback as u64) & width_mask(self.degree);
        self.steps += 1;
        out
    }
}

impl Iterator for Lfsr {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.step())
    }
}

/// Number of clocks before the register first returns to a previously seen
/// state, starting from seed 1. Brute force, so limited to small degrees.
///
/// With a unit constant term the state map is invertible, so the first
/// repeated state is always the seed itself.
pub fn period(poly: Gf2Poly) -> Result<u64, LfsrError> {
    let degree = poly.degree();
    if degree > MAX_PERIOD_DEGREE {
        return Err(LfsrError::DegreeTooLarge {
            degree,
            max: MAX_PERIOD_DEGREE,
        });
    }
    let mut lfsr = Lfsr::new(poly, 1)?;
    loop {
        lfsr.step();
        if lfsr.word() == 1 {
            return Ok(lfsr.step_count());
        }
    }
}
