//! Fixed-length bit strings packed into 64-bit words.
//!
//! Positions are 0-based in the API. Anything written to disk or shown to a
//! user goes through [`crate::format`] helpers, which use 1-based positions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// An individual `x ∈ {0,1}^n`. Bits past `len` in the last word are always zero,
/// so derived equality and hashing are well defined.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut x = Self::zeros(len);
        for w in x.words.iter_mut() {
            *w = u64::MAX;
        }
        x.mask_tail();
        x
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut x = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                x.words[i / WORD] |= 1 << (i % WORD);
            }
        }
        x
    }

    /// Builds the bit string whose `i`-th bit is bit `i` of `index`
    /// (`len ≤ 64`). Used to enumerate `{0,1}^n` in tests and oracles.
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_index supports at most 64 bits");
        let mut x = Self::zeros(len);
        if len > 0 {
            x.words[0] = index;
            x.mask_tail();
        }
        x
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1 << (i % WORD);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitString::from_bools(&bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let x: BitString = "0110".parse().unwrap();
        assert_eq!(x.len(), 4);
        assert!(!x.get(0) && x.get(1) && x.get(2) && !x.get(3));
        assert_eq!(x.to_string(), "0110");
        assert!("01a".parse::<BitString>().is_err());
    }

    #[test]
    fn tail_bits_stay_clear() {
        let x = BitString::ones(70);
        assert_eq!(x.count_ones(), 70);
        assert_eq!(x.words()[1], (1 << 6) - 1);
        assert_eq!(BitString::from_index(u64::MAX, 3).count_ones(), 3);
    }

    #[test]
    fn hamming() {
        let a: BitString = "110010".parse().unwrap();
        let b: BitString = "011011".parse().unwrap();
        assert_eq!(a.hamming_distance(&b), 3);
    }
}
