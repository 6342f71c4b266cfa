//! Characteristic polynomials over GF(2).
//!
//! A polynomial is stored as a coefficient mask where bit `i` is the
//! coefficient of `x^i`. Characteristic polynomials are monic with a unit
//! constant term, so both bit 0 and bit `n` are always set.
//!
//! ```text
//! x^3 + x^2 + 1        = 0b1101       = 0xd
//! x^32 + x^22 + x^2 + x + 1           = 0x100400007
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::factor::distinct_prime_factors;

/// Largest degree for which the arithmetic tests (irreducibility,
/// primitivity) are defined.
pub const MAX_ARITH_DEGREE: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("cannot parse polynomial {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("polynomial degree {0} is below the minimum of 2")]
    DegreeTooSmall(u32),
    #[error("polynomial degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooLarge { degree: u32, max: u32 },
    #[error("polynomial has no constant term (x^0 coefficient must be 1)")]
    NoConstantTerm,
}

fn parse_err(text: &str, reason: impl Into<String>) -> PolyError {
    PolyError::Parse {
        text: text.to_string(),
        reason: reason.into(),
    }
}

/// Characteristic polynomial `x^n + a_{n-1} x^{n-1} + ... + a_1 x + 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gf2Poly {
    mask: u128,
}

impl Gf2Poly {
    /// Builds a polynomial from its coefficient mask.
    pub fn from_mask(mask: u128) -> Result<Self, PolyError> {
        if mask == 0 {
            return Err(PolyError::DegreeTooSmall(0));
        }
        let degree = 127 - mask.leading_zeros();
        if degree < 2 {
            return Err(PolyError::DegreeTooSmall(degree));
        }
        if mask & 1 == 0 {
            return Err(PolyError::NoConstantTerm);
        }
        Ok(Self { mask })
    }

    /// Builds a polynomial from the exponents with nonzero coefficient.
    /// Repeated exponents cancel, as they would in GF(2).
    pub fn from_exponents<I: IntoIterator<Item = u32>>(exponents: I) -> Result<Self, PolyError> {
        let mut mask = 0u128;
        for e in exponents {
            if e > 127 {
                return Err(PolyError::DegreeTooLarge {
                    degree: e,
                    max: 127,
                });
            }
            mask ^= 1u128 << e;
        }
        Self::from_mask(mask)
    }

    pub fn mask(&self) -> u128 {
        self.mask
    }

    pub fn degree(&self) -> u32 {
        127 - self.mask.leading_zeros()
    }

    /// Exponents with coefficient 1, ascending. Always starts with 0 and
    /// ends with the degree.
    pub fn exponents(&self) -> Vec<u32> {
        (0..=self.degree())
            .filter(|&i| self.mask >> i & 1 == 1)
            .collect()
    }

    /// Flip-flop indices (1-based) that feed the XOR feedback, i.e. every
    /// exponent except 0.
    pub fn feedback_taps(&self) -> Vec<u32> {
        self.exponents().into_iter().filter(|&e| e != 0).collect()
    }

    /// Hexadecimal coefficient-mask form, e.g. `0x100400007`.
    pub fn to_hex(&self) -> String {
        format!("{:#x}", self.mask)
    }

    fn check_arith_degree(&self) -> Result<u32, PolyError> {
        let degree = self.degree();
        if degree > MAX_ARITH_DEGREE {
            return Err(PolyError::DegreeTooLarge {
                degree,
                max: MAX_ARITH_DEGREE,
            });
        }
        Ok(degree)
    }

    /// Rabin's irreducibility test: `x^(2^n) = x (mod p)` and
    /// `gcd(x^(2^(n/q)) - x, p) = 1` for every prime `q | n`.
    pub fn is_irreducible(&self) -> Result<bool, PolyError> {
        let n = self.check_arith_degree()?;
        let ring = Residues::new(self.mask, n);
        if ring.frobenius_x(n) != X {
            return Ok(false);
        }
        for q in distinct_prime_factors(n as u64) {
            let h = ring.frobenius_x(n / q as u32) ^ X;
            if poly_gcd(h, self.mask) != 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff the polynomial is irreducible and `x` has multiplicative
    /// order exactly `2^n - 1` modulo it, i.e. an LFSR built on it has the
    /// maximal period.
    pub fn is_primitive(&self) -> Result<bool, PolyError> {
        let n = self.check_arith_degree()?;
        if !self.is_irreducible()? {
            return Ok(false);
        }
        let group_order = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let ring = Residues::new(self.mask, n);
        if ring.pow_x(group_order) != 1 {
            return Ok(false);
        }
        for q in distinct_prime_factors(group_order) {
            if ring.pow_x(group_order / q) == 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

const X: u128 = 0b10;

/// Arithmetic in GF(2)[x] / (p) with residues of degree below `n <= 64`.
struct Residues {
    modulus: u128,
    degree: u32,
}

impl Residues {
    fn new(modulus: u128, degree: u32) -> Self {
        Self { modulus, degree }
    }

    fn reduce_shifted(&self, a: u128) -> u128 {
        if a >> self.degree & 1 == 1 {
            a ^ self.modulus
        } else {
            a
        }
    }

    fn mul(&self, mut a: u128, mut b: u128) -> u128 {
        let mut acc = 0u128;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a = self.reduce_shifted(a << 1);
        }
        acc
    }

    fn pow_x(&self, mut exp: u64) -> u128 {
        let mut base = self.reduce_shifted(X);
        let mut acc = 1u128;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// `x^(2^k) mod p` by `k` squarings.
    fn frobenius_x(&self, k: u32) -> u128 {
        let mut r = self.reduce_shifted(X);
        for _ in 0..k {
            r = self.mul(r, r);
        }
        r
    }
}

fn poly_degree(a: u128) -> Option<u32> {
    (a != 0).then(|| 127 - a.leading_zeros())
}

fn poly_rem(mut a: u128, b: u128) -> u128 {
    let db = poly_degree(b).expect("division by zero polynomial");
    while let Some(da) = poly_degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, poly_rem(a, b));
    }
    a
}

impl fmt::Display for Gf2Poly {
    /// Caret notation, highest power first: `x^32+x^22+x^2+x+1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .exponents()
            .into_iter()
            .rev()
            .map(|e| match e {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{e}"),
            })
            .collect();
        f.write_str(&terms.join("+"))
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

impl FromStr for Gf2Poly {
    type Err = PolyError;

    /// Accepts caret notation (`x^3+x^2+1`, whitespace ignored) or a
    /// hexadecimal coefficient mask (`0xd`).
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(parse_err(text, "empty input"));
        }
        let lowered = compact.to_ascii_lowercase();
        if let Some(hex) = lowered.strip_prefix("0x") {
            let mask = u128::from_str_radix(&hex.replace('_', ""), 16)
                .map_err(|e| parse_err(text, format!("bad hex mask: {e}")))?;
            return Self::from_mask(mask).map_err(|e| parse_err(text, e.to_string()));
        }
        let mut mask = 0u128;
        for term in lowered.split('+') {
            let exponent = match term {
                "" => return Err(parse_err(text, "empty term")),
                "1" => 0,
                "x" => 1,
                _ => {
                    let digits = term
                        .strip_prefix("x^")
                        .ok_or_else(|| parse_err(text, format!("unexpected term {term:?}")))?;
                    let e: u32 = digits
                        .parse()
                        .map_err(|_| parse_err(text, format!("bad exponent in {term:?}")))?;
                    if e > 127 {
                        return Err(parse_err(text, format!("exponent {e} exceeds 127")));
                    }
                    e
                }
            };
            if mask >> exponent & 1 == 1 {
                return Err(parse_err(text, format!("repeated term x^{exponent}")));
            }
            mask |= 1u128 << exponent;
        }
        Self::from_mask(mask).map_err(|e| parse_err(text, e.to_string()))
    }
}

impl Serialize for Gf2Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Gf2Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Gf2Poly {
        s.parse().unwrap()
    }

    #[test]
    fn parses_caret_and_hex_forms() {
        let poly = p("x^32+x^22+x^2+x+1");
        assert_eq!(poly.degree(), 32);
        assert_eq!(poly.exponents(), vec![0, 1, 2, 22, 32]);
        assert_eq!(poly.to_hex(), "0x100400007");
        assert_eq!(p("0x100400007"), poly);
        assert_eq!(p(" x^3 + x^2 + 1 "), p("0xD"));
        assert_eq!(poly.to_string(), "x^32+x^22+x^2+x+1");
        assert_eq!(poly.feedback_taps(), vec![1, 2, 22, 32]);
    }

    #[test]
    fn rejects_malformed_text() {
        assert!(matches!(
            "x^2".parse::<Gf2Poly>(),
            Err(PolyError::Parse { .. })
        ));
        assert!("x^3++1".parse::<Gf2Poly>().is_err());
        assert!("x^3+y+1".parse::<Gf2Poly>().is_err());
        assert!("x^3+x^3+1".parse::<Gf2Poly>().is_err());
        assert!("x+1".parse::<Gf2Poly>().is_err());
        assert!("".parse::<Gf2Poly>().is_err());
        assert!("0xzz".parse::<Gf2Poly>().is_err());
        assert_eq!(Gf2Poly::from_mask(0b1100), Err(PolyError::NoConstantTerm));
    }

    #[test]
    fn primitivity_examples() {
        assert!(p("x^3+x^2+1").is_primitive().unwrap());
        // irreducible, but x has order 5
        let order5 = p("x^4+x^3+x^2+x+1");
        assert!(order5.is_irreducible().unwrap());
        assert!(!order5.is_primitive().unwrap());
        // (x^2+x+1)^2
        let square = p("x^4+x^2+1");
        assert!(!square.is_irreducible().unwrap());
        assert!(!square.is_primitive().unwrap());
    }

    #[test]
    fn known_primitive_polynomials_of_large_degree() {
        for text in [
            "x^32+x^22+x^2+x+1",
            "x^31+x^28+1",
            "x^61+x^5+x^2+x+1",
            "x^64+x^4+x^3+x+1",
        ] {
            assert!(p(text).is_primitive().unwrap(), "{text}");
        }
        // reducible: x^64 + 1 = (x + 1)^64
        assert!(!p("x^64+1").is_irreducible().unwrap());
    }

    #[test]
    fn degree_cap() {
        let big = p("x^65+x+1");
        assert_eq!(
            big.is_primitive(),
            Err(PolyError::DegreeTooLarge {
                degree: 65,
                max: 64
            })
        );
    }

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        // Irreducible polynomials with nonzero constant term over GF(2):
        // degree 2..=8 -> 1, 2, 3, 6, 9, 18, 30 (x itself excluded at degree 1 only).
        let expected = [1, 2, 3, 6, 9, 18, 30];
        for (n, want) in (2u32..=8).zip(expected) {
            let count = (0u128..1 << (n - 1))
                .map(|mid| (1u128 << n) | (mid << 1) | 1)
                .filter(|&mask| Gf2Poly::from_mask(mask).unwrap().is_irreducible().unwrap())
                .count();
            assert_eq!(count, want, "degree {n}");
        }
    }

    #[test]
    fn primitive_counts_match_euler_phi() {
        // phi(2^n - 1) / n for n = 2..=10
        let expected = [1, 2, 2, 6, 6, 18, 16, 48, 60];
        for (n, want) in (2u32..=10).zip(expected) {
            let count = (0u128..1 << (n - 1))
                .map(|mid| (1u128 << n) | (mid << 1) | 1)
                .filter(|&mask| Gf2Poly::from_mask(mask).unwrap().is_primitive().unwrap())
                .count();
            assert_eq!(count, want, "degree {n}");
        }
    }

    #[test]
    fn serde_uses_caret_text() {
        let poly = p("x^3+x^2+1");
        let json = serde_json::to_string(&poly).unwrap();
        assert_eq!(json, "\"x^3+x^2+1\"");
        assert_eq!(serde_json::from_str::<Gf2Poly>("\"0xd\"").unwrap(), poly);
    }
}
