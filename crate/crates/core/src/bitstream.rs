//! Packed stochastic bitstreams and the single-gate SC operators.
//!
//! Bit `i` of a stream is the value emitted at clock cycle `i`. Bits are packed
//! 64 per word, least-significant bit first, and the unused tail of the last
//! word is always zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a stream's ones-density maps to a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Encoding {
    /// `p = ones / k`, range `[0, 1]`.
    Unipolar,
    /// `x = (2 ones - k) / k`, range `[-1, 1]`.
    Bipolar,
}

/// Identifier of a shared random sequence. Streams carrying the same id were
/// generated cycle-aligned from identical random words.
pub type GroupId = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitstream {
    words: Vec<u64>,
    len: usize,
    encoding: Encoding,
    group: Option<GroupId>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl Bitstream {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I, encoding: Encoding) -> Result<Self> {
        let mut words = Vec::new();
        let mut len = 0usize;
        let mut cur = 0u64;
        for b in bits {
            cur |= u64::from(b) << (len % 64);
            len += 1;
            if len.is_multiple_of(64) {
                words.push(cur);
                cur = 0;
            }
        }
        if !len.is_multiple_of(64) {
            words.push(cur);
        }
        if len == 0 {
            return Err(Error::EmptyStream);
        }
        Ok(Self { words, len, encoding, group: None })
    }

    /// Build from packed words. Bits beyond `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize, encoding: Encoding) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptyStream);
        }
        let n = words_for(len);
        if words.len() < n {
            return Err(Error::LengthMismatch(words.len() * 64, len));
        }
        words.truncate(n);
        words[n - 1] &= tail_mask(len);
        Ok(Self { words, len, encoding, group: None })
    }

    pub fn zeros(len: usize, encoding: Encoding) -> Result<Self> {
        Self::from_words(vec![0; words_for(len)], len, encoding)
    }

    pub fn ones(len: usize, encoding: Encoding) -> Result<Self> {
        Self::from_words(vec![u64::MAX; words_for(len)], len, encoding)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; streams have at least one bit.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn group(&self) -> Option<GroupId> {
        self.group
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.words[i / 64] >> (i % 64)) & 1 == 1)
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    /// Same bits read under another encoding.
    pub fn relabel(mut self, encoding: Encoding) -> Self {
        self.encoding = encoding;
        self
    }

    /// Tag the stream as a member of a correlation group.
    pub fn in_group(mut self, group: GroupId) -> Self {
        self.group = Some(group);
        self
    }

    pub fn decode(&self) -> f64 {
        decode_count(self.count_ones(), self.len as u64, self.encoding)
    }

    /// Bitwise complement. Negates a bipolar value, maps `p` to `1 - p`.
    pub fn not(&self) -> Self {
        let words = self.words.iter().map(|w| !w).collect();
        let mut out = Self::from_words(words, self.len, self.encoding).expect("length preserved");
        out.group = self.group;
        out
    }

    /// Unipolar multiplication.
    pub fn and_mul(&self, other: &Self) -> Result<Self> {
        self.require(Encoding::Unipolar)?;
        other.require(Encoding::Unipolar)?;
        self.zip(other, |a, b| a & b)
    }

    /// Bipolar multiplication.
    pub fn xnor_mul(&self, other: &Self) -> Result<Self> {
        self.require(Encoding::Bipolar)?;
        other.require(Encoding::Bipolar)?;
        self.zip(other, |a, b| !(a ^ b))
    }

    /// Bitwise OR. Acts as a maximum when both streams share a comparator
    /// threshold sequence; the result stays in the operands' group only if
    /// they agree.
    pub fn or_combine(&self, other: &Self) -> Result<Self> {
        other.require(self.encoding)?;
        let mut out = self.zip(other, |a, b| a | b)?;
        if self.group == other.group {
            out.group = self.group;
        }
        Ok(out)
    }

    fn require(&self, enc: Encoding) -> Result<()> {
        if self.encoding != enc {
            return Err(Error::EncodingMismatch { expected: enc, found: self.encoding });
        }
        Ok(())
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::LengthMismatch(self.len, other.len));
        }
        let words = self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect();
        Self::from_words(words, self.len, self.encoding)
    }
}

/// Decode a ones-count over `k` cycles.
pub fn decode_count(ones: u64, k: u64, encoding: Encoding) -> f64 {
    match encoding {
        Encoding::Unipolar => ones as f64 / k as f64,
        Encoding::Bipolar => (2.0 * ones as f64 - k as f64) / k as f64,
    }
}

/// Standard deviation of a decoded stream whose bits are i.i.d. with
/// probability `p` of being one.
pub fn binomial_sigma(p: f64, k: usize, encoding: Encoding) -> f64 {
    let s = (p * (1.0 - p) / k as f64).sqrt();
    match encoding {
        Encoding::Unipolar => s,
        Encoding::Bipolar => 2.0 * s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(bits: &[u8], enc: Encoding) -> Bitstream {
        Bitstream::from_bits(bits.iter().map(|&b| b == 1), enc).unwrap()
    }

    #[test]
    fn decode_examples() {
        let s = stream(&[1, 0, 1, 0, 0, 1, 0, 0, 1, 0], Encoding::Unipolar);
        assert_eq!(s.decode(), 0.4);
        for k in [1, 7, 64, 65, 1000] {
            assert_eq!(Bitstream::ones(k, Encoding::Bipolar).unwrap().decode(), 1.0);
        }
        let s = stream(&[1, 1, 0, 1, 1, 0, 1, 1], Encoding::Bipolar);
        let by_symbols: f64 = s.iter().map(|b| if b { 1.0 } else { -1.0 }).sum::<f64>() / 8.0;
        assert_eq!(s.decode(), 0.5);
        assert_eq!(s.decode(), by_symbols);
    }

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(Bitstream::from_bits([], Encoding::Unipolar), Err(Error::EmptyStream)));
        assert!(Bitstream::zeros(0, Encoding::Bipolar).is_err());
    }

    #[test]
    fn tail_bits_are_masked() {
        let s = Bitstream::from_words(vec![u64::MAX, u64::MAX], 70, Encoding::Unipolar).unwrap();
        assert_eq!(s.count_ones(), 70);
        assert_eq!(s.not().count_ones(), 0);
    }

    #[test]
    fn gate_identities() {
        let b = stream(&[0, 1, 1, 0, 1, 0, 0, 1, 1], Encoding::Unipolar);
        let one = Bitstream::ones(9, Encoding::Unipolar).unwrap();
        let zero = Bitstream::zeros(9, Encoding::Unipolar).unwrap();
        assert_eq!(one.and_mul(&b).unwrap(), b);
        assert_eq!(zero.and_mul(&b).unwrap(), zero);
        assert_eq!(zero.or_combine(&b).unwrap(), b);

        let bb = b.clone().relabel(Encoding::Bipolar);
        let pos = Bitstream::ones(9, Encoding::Bipolar).unwrap();
        let neg = Bitstream::zeros(9, Encoding::Bipolar).unwrap();
        assert_eq!(pos.xnor_mul(&bb).unwrap(), bb);
        let flipped = neg.xnor_mul(&bb).unwrap();
        assert_eq!(flipped, bb.not());
        assert_eq!(flipped.decode(), -bb.decode());
    }

    #[test]
    fn mismatches_are_errors() {
        let u = Bitstream::ones(8, Encoding::Unipolar).unwrap();
        let b = Bitstream::ones(8, Encoding::Bipolar).unwrap();
        let short = Bitstream::ones(7, Encoding::Unipolar).unwrap();
        assert!(matches!(u.and_mul(&b), Err(Error::EncodingMismatch { .. })));
        assert!(matches!(u.xnor_mul(&u), Err(Error::EncodingMismatch { .. })));
        assert!(matches!(u.or_combine(&b), Err(Error::EncodingMismatch { .. })));
        assert!(matches!(u.and_mul(&short), Err(Error::LengthMismatch(8, 7))));
    }

    #[test]
    fn or_keeps_group_only_when_shared() {
        let a = Bitstream::ones(4, Encoding::Bipolar).unwrap().in_group(3);
        let b = Bitstream::zeros(4, Encoding::Bipolar).unwrap().in_group(3);
        let c = Bitstream::zeros(4, Encoding::Bipolar).unwrap().in_group(4);
        assert_eq!(a.or_combine(&b).unwrap().group(), Some(3));
        assert_eq!(a.or_combine(&c).unwrap().group(), None);
    }

    proptest! {
        #[test]
        fn idempotence(bits in proptest::collection::vec(any::<bool>(), 1..300)) {
            let a = Bitstream::from_bits(bits.iter().copied(), Encoding::Unipolar).unwrap();
            prop_assert_eq!(a.and_mul(&a).unwrap(), a.clone());
            prop_assert_eq!(a.or_combine(&a).unwrap(), a.clone());
        }

        #[test]
        fn decode_matches_count(bits in proptest::collection::vec(any::<bool>(), 1..300)) {
            let k = bits.len();
            let ones = bits.iter().filter(|&&b| b).count();
            let u = Bitstream::from_bits(bits.iter().copied(), Encoding::Unipolar).unwrap();
            prop_assert!(u.count_ones() as usize <= k);
            prop_assert_eq!(u.decode(), ones as f64 / k as f64);
            let b = u.relabel(Encoding::Bipolar);
            let v = b.decode();
            prop_assert!((-1.0..=1.0).contains(&v));
            // re-encoding the count reproduces the value
            let back = ((v + 1.0) / 2.0 * k as f64).round() as usize;
            prop_assert_eq!(back, ones);
        }

        #[test]
        fn packed_roundtrip(bits in proptest::collection::vec(any::<bool>(), 1..300)) {
            let s = Bitstream::from_bits(bits.iter().copied(), Encoding::Unipolar).unwrap();
            prop_assert_eq!(s.iter().collect::<Vec<_>>(), bits.clone());
            prop_assert_eq!(s.len(), bits.len());
        }
    }
}
