//! Fixed-length binary vectors.
//!
//! Coordinate `i` lives in bit `i % 64` of word `i / 64`. Bits past `len` in
//! the last word are always zero, so word-wise comparisons and popcounts are
//! exact.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; word_count(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![!0; word_count(len)],
        };
        v.mask_tail();
        v
    }

    /// Low `len` bits of `value`; `len` must be at most 64.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut v = BitVector {
            len,
            words: if len == 0 { vec![] } else { vec![value] },
        };
        v.mask_tail();
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / 64] |= 1 << (i % 64);
            }
        }
        v
    }

    /// Parses a left-to-right string of `0`/`1` characters (coordinate 0 first).
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::param(format!("invalid bit character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitVector::from_bits(&bits))
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = BitVector {
            len,
            words: (0..word_count(len)).map(|_| rng.gen()).collect(),
        };
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Value of the vector read as an integer; requires `len <= 64`.
    pub fn as_u64(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn try_get(&self, i: usize) -> Result<bool> {
        if i >= self.len {
            return Err(Error::OutOfRange {
                index: i,
                dim: self.len,
            });
        }
        Ok(self.get(i))
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "coordinate {i} out of range for {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "coordinate {i} out of range for {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// Hamming distance; panics on length mismatch (see [`hamming_distance`]).
    #[inline]
    pub fn dist(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len, "dimension mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len, "dimension mismatch");
        BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    /// Copy of `self` extended with zero coordinates up to `len`.
    pub fn padded(&self, len: usize) -> BitVector {
        assert!(len >= self.len);
        let mut words = self.words.clone();
        words.resize(word_count(len), 0);
        BitVector { len, words }
    }

    /// Projection onto `idx` in the given order, without bounds errors.
    pub fn gather(&self, idx: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            if self.get(i) {
                out.words[k / 64] |= 1 << (k % 64);
            }
        }
        out
    }

    /// Gathers up to 64 coordinates into the low bits of an integer.
    #[inline]
    pub fn gather_u64(&self, idx: &[usize]) -> u64 {
        debug_assert!(idx.len() <= 64);
        let mut out = 0u64;
        for (k, &i) in idx.iter().enumerate() {
            out |= ((self.words[i / 64] >> (i % 64)) & 1) << k;
        }
        out
    }

    pub fn concat(parts: &[BitVector]) -> BitVector {
        let len = parts.iter().map(|p| p.len).sum();
        let mut out = BitVector::zeros(len);
        let mut at = 0;
        for p in parts {
            for i in p.ones_iter() {
                out.words[(at + i) / 64] |= 1 << ((at + i) % 64);
            }
            at += p.len;
        }
        out
    }

    /// Hex encoding: coordinate 0 is the low bit of the first digit.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut s = String::with_capacity(digits);
        for k in 0..digits {
            let nibble = (self.words[k / 16] >> ((k % 16) * 4)) & 0xf;
            s.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        if s.len() != len.div_ceil(4) {
            return Err(Error::Dimension {
                expected: len.div_ceil(4),
                got: s.len(),
            });
        }
        let mut v = BitVector::zeros(len);
        for (k, c) in s.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::param(format!("invalid hex digit {c:?}")))?
                as u64;
            v.words[k / 16] |= nibble << ((k % 16) * 4);
        }
        let tail = v.words.last().copied();
        v.mask_tail();
        if tail != v.words.last().copied() {
            return Err(Error::param("hex string sets bits beyond the dimension"));
        }
        Ok(v)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, ")")
    }
}

pub fn hamming_distance(x: &BitVector, y: &BitVector) -> Result<usize> {
    check_dim(x.len(), y.len())?;
    Ok(x.dist(y))
}

/// Projection of `x` onto the coordinates in `s`, taken in increasing order.
pub fn project(x: &BitVector, s: &[usize]) -> Result<BitVector> {
    let mut idx = s.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if let Some(&bad) = idx.iter().find(|&&i| i >= x.len()) {
        return Err(Error::OutOfRange {
            index: bad,
            dim: x.len(),
        });
    }
    Ok(x.gather(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        BitVector::from_bit_str(s).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hamming_distance(&bv("0000"), &bv("0000")).unwrap(), 0);
        assert_eq!(hamming_distance(&bv("0000"), &bv("1111")).unwrap(), 4);
        let expected = "0000"
            .chars()
            .zip("1100".chars())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(hamming_distance(&bv("0000"), &bv("1100")).unwrap(), expected);
    }

    #[test]
    fn distance_length_mismatch() {
        assert!(matches!(
            hamming_distance(&bv("000"), &bv("0000")),
            Err(Error::Dimension { expected: 3, got: 4 })
        ));
    }

    #[test]
    fn project_examples() {
        let x = bv("1010");
        assert_eq!(project(&x, &[0, 1]).unwrap(), bv("10"));
        assert_eq!(project(&x, &[]).unwrap(), BitVector::zeros(0));
        let picked: String = [1, 3].iter().map(|&i| if x.get(i) { '1' } else { '0' }).collect();
        assert_eq!(project(&x, &[1, 3]).unwrap(), bv(&picked));
        assert_eq!(project(&x, &[3, 1]).unwrap(), bv("00"));
        assert!(matches!(project(&x, &[4]), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn metric_axioms_exhaustive() {
        for d in 0..=8usize {
            let all: Vec<BitVector> = (0..1u64 << d).map(|v| BitVector::from_u64(v, d)).collect();
            for x in &all {
                assert_eq!(x.dist(x), 0);
                for y in &all {
                    let dxy = x.dist(y);
                    assert_eq!(dxy, y.dist(x));
                    assert!(dxy <= d);
                    if x != y {
                        assert!(dxy > 0);
                    }
                }
            }
            if d <= 6 {
                for x in &all {
                    for y in &all {
                        for z in &all {
                            assert!(x.dist(z) <= x.dist(y) + y.dist(z));
                        }
                    }
                }
            } else {
                // Triangle inequality reduces to weight subadditivity of xors.
                for a in &all {
                    for b in &all {
                        assert!(a.xor(b).weight() <= a.weight() + b.weight());
                    }
                }
            }
        }
    }

    #[test]
    fn hex_layout() {
        let mut v = BitVector::zeros(8);
        v.set(0, true);
        assert_eq!(v.to_hex(), "10");
        v.set(7, true);
        assert_eq!(v.to_hex(), "18");
        assert!(BitVector::from_hex("f", 3).is_err());
        assert_eq!(BitVector::from_hex("7", 3).unwrap(), BitVector::ones(3));
    }

    #[test]
    fn concat_and_pad() {
        let c = BitVector::concat(&[bv("10"), bv("011")]);
        assert_eq!(c, bv("10011"));
        assert_eq!(bv("1").padded(70).weight(), 1);
        assert_eq!(bv("101").gather_u64(&[2, 1, 0]), 0b101);
    }

    proptest! {
        #[test]
        fn hex_round_trip(len in 0usize..300, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v = BitVector::random(len, &mut rng);
            prop_assert_eq!(BitVector::from_hex(&v.to_hex(), len).unwrap(), v);
        }

        #[test]
        fn ones_iter_matches_get(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let v = BitVector::from_bits(&bits);
            let ones: Vec<usize> = v.ones_iter().collect();
            let expected: Vec<usize> = (0..bits.len()).filter(|&i| bits[i]).collect();
            prop_assert_eq!(ones, expected);
            prop_assert_eq!(v.weight(), bits.iter().filter(|&&b| b).count());
        }
    }
}
