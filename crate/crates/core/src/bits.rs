//! Packed bit sequences and their on-disk encodings.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitFormatError {
    #[error("line {line}: expected '0' or '1', found {found:?}")]
    BadAsciiLine { line: usize, found: String },
    #[error("packed data holds {available} bits, fewer than the requested {requested}")]
    TooShort { available: usize, requested: usize },
}

/// Append-only bit vector, bit `i` stored in word `i / 64` at position `i % 64`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitSeq {
    words: Vec<u64>,
    len: usize,
}

impl BitSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let offset = self.len % 64;
        if offset == 0 {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << offset;
        }
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Backing words; bits past `len` are zero.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// 0.0 / 1.0 samples.
    pub fn to_f64(&self) -> Vec<f64> {
        self.iter().map(|b| if b { 1.0 } else { 0.0 }).collect()
    }

    /// Eight bits per byte, first bit in the most significant position; the
    /// final byte is zero-padded.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for (i, bit) in self.iter().enumerate() {
            if bit {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    /// Decodes packed bytes. With `len = None` every bit of every byte is
    /// taken.
    pub fn from_packed_bytes(bytes: &[u8], len: Option<usize>) -> Result<Self, BitFormatError> {
        let available = bytes.len() * 8;
        let len = len.unwrap_or(available);
        if len > available {
            return Err(BitFormatError::TooShort {
                available,
                requested: len,
            });
        }
        Ok((0..len)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect())
    }

    /// One `0` or `1` per line.
    pub fn to_ascii_lines(&self) -> String {
        let mut out = String::with_capacity(self.len * 2);
        for bit in self.iter() {
            out.push(if bit { '1' } else { '0' });
            out.push('\n');
        }
        out
    }

    /// Parses one bit per line; blank lines are skipped.
    pub fn from_ascii_lines(text: &str) -> Result<Self, BitFormatError> {
        let mut seq = BitSeq::new();
        for (i, line) in text.lines().enumerate() {
            match line.trim() {
                "" => {}
                "0" => seq.push(false),
                "1" => seq.push(true),
                other => {
                    return Err(BitFormatError::BadAsciiLine {
                        line: i + 1,
                        found: other.to_string(),
                    })
                }
            }
        }
        Ok(seq)
    }
}

impl FromIterator<bool> for BitSeq {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut seq = BitSeq::new();
        for bit in iter {
            seq.push(bit);
        }
        seq
    }
}
