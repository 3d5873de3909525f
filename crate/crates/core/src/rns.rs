//! Random number sources feeding the stochastic number generators.
//!
//! [`Lfsr`] is a Fibonacci shift register with XOR feedback. The register
//! shifts toward bit 0, which is the output tap, and the feedback bit enters
//! at bit `n - 1`. Chains that consume one random bit per stage read `R_i`
//! from bit `i - 1` of the emitted word.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_LFSR_WIDTH: u32 = 3;
pub const MAX_LFSR_WIDTH: u32 = 16;

/// One primitive feedback polynomial per width, as the exponents of its
/// nonzero terms (the `x^0` term is implied).
pub const PRIMITIVE_TAPS: [(u32, &[u32]); 14] = [
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 6, 4, 1]),
    (13, &[13, 4, 3, 1]),
    (14, &[14, 5, 3, 1]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
];

/// A per-cycle supplier of `width`-bit random words.
pub trait RandomSource {
    fn width(&self) -> u32;
    fn next_word(&mut self) -> u32;
}

impl<S: RandomSource + ?Sized> RandomSource for &mut S {
    fn width(&self) -> u32 {
        (**self).width()
    }
    fn next_word(&mut self) -> u32 {
        (**self).next_word()
    }
}

impl<S: RandomSource + ?Sized> RandomSource for Box<S> {
    fn width(&self) -> u32 {
        (**self).width()
    }
    fn next_word(&mut self) -> u32 {
        (**self).next_word()
    }
}

/// Bits needed to represent values below `m`.
pub fn bits_for_range(m: u64) -> u32 {
    if m <= 1 {
        0
    } else {
        64 - (m - 1).leading_zeros()
    }
}

/// Draw a value uniform on `[0, m)` by rejection on the low bits of the
/// source's words, avoiding modulo bias.
pub fn sample_below<S: RandomSource + ?Sized>(source: &mut S, m: u64) -> Result<u32> {
    assert!((1..=1 << 32).contains(&m), "range {m} unsupported");
    let bits = bits_for_range(m);
    if bits > source.width() {
        return Err(Error::SourceTooNarrow { have: source.width(), need: bits });
    }
    let mask = if bits == 32 { u32::MAX } else { (1u32 << bits) - 1 };
    loop {
        let r = source.next_word() & mask;
        if u64::from(r) < m {
            return Ok(r);
        }
    }
}

/// Feedback mask of a polynomial given by exponents, in this register's bit layout.
pub fn taps_mask(width: u32, exponents: &[u32]) -> Result<u32> {
    let mut mask = 0u32;
    for &e in exponents {
        if e == 0 || e > width {
            return Err(Error::InvalidLfsr(format!("exponent {e} outside 1..={width}")));
        }
        mask |= 1 << (width - e);
    }
    Ok(mask)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lfsr {
    width: u32,
    taps: u32,
    state: u32,
}

impl Lfsr {
    pub fn new(width: u32, taps: u32, seed: u32) -> Result<Self> {
        if !(MIN_LFSR_WIDTH..=MAX_LFSR_WIDTH).contains(&width) {
            return Err(Error::WidthOutOfRange(width, MIN_LFSR_WIDTH, MAX_LFSR_WIDTH));
        }
        let full = (1u32 << width) - 1;
        if taps & !full != 0 || taps & 1 == 0 {
            return Err(Error::InvalidLfsr(format!(
                "taps {taps:#x} must lie within {width} bits and include the output tap"
            )));
        }
        if seed == 0 || seed > full {
            return Err(Error::InvalidLfsr(format!("seed {seed:#x} must be a nonzero {width}-bit word")));
        }
        Ok(Self { width, taps, state: seed })
    }

    /// Register using the built-in primitive polynomial for `width`.
    pub fn maximal(width: u32, seed: u32) -> Result<Self> {
        let exps = PRIMITIVE_TAPS.iter().find(|(w, _)| *w == width).map(|(_, e)| *e).ok_or(Error::WidthOutOfRange(
            width,
            MIN_LFSR_WIDTH,
            MAX_LFSR_WIDTH,
        ))?;
        Self::new(width, taps_mask(width, exps)?, seed)
    }

    /// Like [`Lfsr::maximal`] but taking polynomials from `table` first.
    pub fn from_table(table: &PolynomialTable, width: u32, seed: u32) -> Result<Self> {
        match table.taps.get(&width) {
            Some(exps) => Self::new(width, taps_mask(width, exps)?, seed),
            None => Self::maximal(width, seed),
        }
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn taps(&self) -> u32 {
        self.taps
    }

    /// Advance one clock and return the new register contents.
    pub fn step(&mut self) -> u32 {
        let fb = (self.state & self.taps).count_ones() & 1;
        self.state = (self.state >> 1) | (fb << (self.width - 1));
        self.state
    }

    /// Length of the state cycle through the current state.
    pub fn period(&self) -> u64 {
        let mut probe = self.clone();
        let start = self.state;
        let mut n = 0u64;
        loop {
            probe.step();
            n += 1;
            if probe.state == start {
                return n;
            }
        }
    }
}

impl RandomSource for Lfsr {
    fn width(&self) -> u32 {
        self.width
    }
    fn next_word(&mut self) -> u32 {
        self.step()
    }
}

/// Per-width polynomial overrides, e.g. loaded from a config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialTable {
    pub taps: BTreeMap<u32, Vec<u32>>,
}

impl PolynomialTable {
    pub fn builtin() -> Self {
        Self { taps: PRIMITIVE_TAPS.iter().map(|(w, e)| (*w, e.to_vec())).collect() }
    }

    /// Every entry must be a maximal-length polynomial of its width.
    pub fn validate(&self) -> Result<()> {
        for (&w, exps) in &self.taps {
            let l = Lfsr::new(w, taps_mask(w, exps)?, 1)?;
            let p = l.period();
            if p != (1u64 << w) - 1 {
                return Err(Error::Config(format!(
                    "width-{w} polynomial {exps:?} has period {p}, not {}",
                    (1u64 << w) - 1
                )));
            }
        }
        Ok(())
    }
}

/// A base source whose output bits are rewired: bit `i` of the emitted word
/// is bit `permutation[i]` of the base word.
#[derive(Debug, Clone)]
pub struct SharedSource<S> {
    base: S,
    permutation: Vec<u32>,
}

impl<S: RandomSource> SharedSource<S> {
    pub fn new(base: S, permutation: Vec<u32>) -> Result<Self> {
        let n = base.width();
        let mut seen = vec![false; n as usize];
        if permutation.len() != n as usize {
            return Err(Error::InvalidPermutation(n));
        }
        for &p in &permutation {
            if p >= n || std::mem::replace(&mut seen[p as usize], true) {
                return Err(Error::InvalidPermutation(n));
            }
        }
        Ok(Self { base, permutation })
    }

    pub fn identity(base: S) -> Self {
        let n = base.width();
        Self { base, permutation: (0..n).collect() }
    }

    /// Bits reversed, a simple decorrelating rewiring.
    pub fn reversed(base: S) -> Self {
        let n = base.width();
        Self { base, permutation: (0..n).rev().collect() }
    }

    pub fn permute(&self, word: u32) -> u32 {
        self.permutation.iter().enumerate().fold(0, |acc, (i, &p)| acc | (((word >> p) & 1) << i))
    }
}

impl<S: RandomSource> RandomSource for SharedSource<S> {
    fn width(&self) -> u32 {
        self.base.width()
    }
    fn next_word(&mut self) -> u32 {
        let w = self.base.next_word();
        self.permute(w)
    }
}

/// Seeded uniform source standing in for ideal independent random bits.
#[derive(Debug, Clone)]
pub struct IdealSource {
    seed: u64,
    width: u32,
    rng: ChaCha8Rng,
}

impl IdealSource {
    pub fn new(seed: u64, width: u32) -> Result<Self> {
        Self::derive(seed, 0, width)
    }

    /// An independent sub-stream of `root`, selected by `stream`.
    pub fn derive(root: u64, stream: u64, width: u32) -> Result<Self> {
        if !(1..=32).contains(&width) {
            return Err(Error::WidthOutOfRange(width, 1, 32));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(root);
        rng.set_stream(stream);
        Ok(Self { seed: root, width, rng })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RandomSource for IdealSource {
    fn width(&self) -> u32 {
        self.width
    }
    fn next_word(&mut self) -> u32 {
        let w = self.rng.next_u32();
        if self.width == 32 {
            w
        } else {
            w & ((1 << self.width) - 1)
        }
    }
}

/// Mix two integers into a well-spread 64-bit value (splitmix64 finalizer).
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
