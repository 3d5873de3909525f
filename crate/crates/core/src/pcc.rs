//! Probability conversion circuits.
//!
//! Input bit `X_k` (k = 1..N) is bit `k - 1` of the word, so `X_1` is the
//! least-significant bit. For the two chain circuits, random bit `R_i` is
//! bit `i - 1` of the random word and stage `i` consumes `X_i` and `R_i`.
//!
//! The NAND-NOR chain starts from a constant 0. Each stage computes
//! `NAND(O_{i-1}, R_i)` when its effective control `X_i ^ mask_i` is 0 and
//! `NOR(O_{i-1}, R_i)` when it is 1. Writing `s_i` for "stage selects NAND",
//! the stage expectation obeys `m_i = -m_{i-1}/2 + c_i` with `c_i = (1 + s_i)/2`.
//! Every `m_i` is dyadic, so `M_i = 2^i m_i` is an integer with
//! `M_i = -M_{i-1} + 2^{i-1}(1 + s_i)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstream::{Bitstream, Encoding};
use crate::error::{Error, Result};
use crate::rns::RandomSource;

pub const MIN_PRECISION: u32 = 3;
pub const MAX_PRECISION: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PccKind {
    Comparator,
    MuxChain,
    NandNorChain,
}

impl PccKind {
    pub const ALL: [PccKind; 3] = [PccKind::Comparator, PccKind::MuxChain, PccKind::NandNorChain];

    pub fn name(self) -> &'static str {
        match self {
            PccKind::Comparator => "comparator",
            PccKind::MuxChain => "mux-chain",
            PccKind::NandNorChain => "nand-nor-chain",
        }
    }
}

impl std::fmt::Display for PccKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PccKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "comparator" | "cmp" => Ok(PccKind::Comparator),
            "mux-chain" | "mux" => Ok(PccKind::MuxChain),
            "nand-nor-chain" | "nand-nor" | "nandnor" => Ok(PccKind::NandNorChain),
            other => Err(Error::Config(format!("unknown PCC kind `{other}`"))),
        }
    }
}

/// A conversion circuit of a given precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PccSpec {
    kind: PccKind,
    precision: u32,
    mask: u32,
}

impl PccSpec {
    pub fn new(kind: PccKind, precision: u32) -> Result<Self> {
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
            return Err(Error::WidthOutOfRange(precision, MIN_PRECISION, MAX_PRECISION));
        }
        let mask = if kind == PccKind::NandNorChain { inverter_mask(precision) } else { 0 };
        Ok(Self { kind, precision, mask })
    }

    /// Replace the NAND-NOR inverter mask. Only meaningful for fault
    /// injection; any mask other than [`inverter_mask`] breaks the
    /// chain's equivalence with the MUX chain.
    pub fn with_inverter_mask(mut self, mask: u32) -> Self {
        self.mask = mask & ((1 << self.precision) - 1);
        self
    }

    pub fn kind(&self) -> PccKind {
        self.kind
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    /// Largest accepted input word. The comparator also takes `2^N`, which
    /// exceeds every `R` and so yields a constant-one stream.
    pub fn max_word(&self) -> u32 {
        match self.kind {
            PccKind::Comparator => 1 << self.precision,
            _ => (1 << self.precision) - 1,
        }
    }

    pub fn check_word(&self, x: u32) -> Result<()> {
        if x > self.max_word() {
            return Err(Error::WordOutOfRange { x: u64::from(x), bits: self.precision });
        }
        Ok(())
    }

    /// One output bit for input `x` and random word `r`.
    #[inline]
    pub fn bit(&self, x: u32, r: u32) -> bool {
        let n = self.precision;
        let r = r & ((1 << n) - 1);
        match self.kind {
            PccKind::Comparator => cmp_bit(x, r),
            PccKind::MuxChain => mux_chain_bit(x, r, n),
            PccKind::NandNorChain => nandnor_chain_bit(x, r, n, self.mask),
        }
    }

    /// Analytic probability of a one.
    pub fn expected(&self, x: u32) -> f64 {
        let n = self.precision;
        match self.kind {
            PccKind::Comparator => f64::from(x) / f64::from(1u32 << n),
            PccKind::MuxChain => mux_chain_probability(x, n),
            PccKind::NandNorChain => recurrence_numerator(x, n, self.mask) as f64 / (1u64 << n) as f64,
        }
    }
}

/// A validated `N`-bit input word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputWord {
    value: u32,
    precision: u32,
}

impl InputWord {
    pub fn new(value: u32, precision: u32) -> Result<Self> {
        if !(1..=MAX_PRECISION).contains(&precision) || value >= 1 << precision {
            return Err(Error::WordOutOfRange { x: u64::from(value), bits: precision });
        }
        Ok(Self { value, precision })
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `X_k` for k in 1..=N.
    pub fn bit(&self, k: u32) -> bool {
        assert!((1..=self.precision).contains(&k));
        (self.value >> (k - 1)) & 1 == 1
    }
}

#[inline]
pub fn cmp_bit(x: u32, r: u32) -> bool {
    x > r
}

/// MUX chain from a ground input: stage `i` passes `O_{i-1} AND NOT R_i`
/// when `X_i = 0` and `O_{i-1} OR R_i` when `X_i = 1`.
#[inline]
pub fn mux_chain_bit(x: u32, r: u32, n: u32) -> bool {
    let mut o = false;
    for i in 0..n {
        let ri = (r >> i) & 1 == 1;
        o = if (x >> i) & 1 == 1 { o | ri } else { o & !ri };
    }
    o
}

pub fn mux_chain_probability(x: u32, n: u32) -> f64 {
    f64::from(x) / (1u64 << n) as f64
}

/// Stages whose `X_i` input is inverted: the even stages when `N` is even,
/// the odd stages when `N` is odd. Bit `i - 1` stands for stage `i`.
pub fn inverter_mask(n: u32) -> u32 {
    assert!((1..=31).contains(&n));
    let odd_stages = 0x5555_5555u32 & ((1u32 << n) - 1);
    let even_stages = 0xAAAA_AAAAu32 & ((1u32 << n) - 1);
    if n.is_multiple_of(2) {
        even_stages
    } else {
        odd_stages
    }
}

/// One reconfigurable stage: NAND when `control` is 0, NOR when 1.
#[inline]
pub fn nandnor_stage(prev: bool, r: bool, control: bool) -> bool {
    if control {
        !(prev | r)
    } else {
        !(prev & r)
    }
}

#[inline]
pub fn nandnor_chain_bit(x: u32, r: u32, n: u32, mask: u32) -> bool {
    let mut o = false;
    for i in 0..n {
        let control = ((x ^ mask) >> i) & 1 == 1;
        o = nandnor_stage(o, (r >> i) & 1 == 1, control);
    }
    o
}

/// All intermediate outputs `O_0..=O_N` for one random word.
pub fn chain_outputs(x: u32, r: u32, n: u32, mask: u32) -> Vec<bool> {
    let mut out = vec![false];
    for i in 0..n {
        let control = ((x ^ mask) >> i) & 1 == 1;
        let prev = out[i as usize];
        out.push(nandnor_stage(prev, (r >> i) & 1 == 1, control));
    }
    out
}

/// `2^N m_N` by the integer form of the stage recurrence.
pub fn recurrence_numerator(x: u32, n: u32, mask: u32) -> i64 {
    let mut m = 0i64;
    for i in 1..=n {
        let nand = ((x ^ mask) >> (i - 1)) & 1 == 0;
        let c = if nand { 1i64 << i } else { 1i64 << (i - 1) };
        m = c - m;
    }
    m
}

/// Expected NAND-NOR chain output with the standard inverter mask,
/// computed by the stage recurrence `m_i = -m_{i-1}/2 + c_i`.
pub fn nandnor_expected(x: u32, n: u32) -> f64 {
    let mask = inverter_mask(n);
    let mut m = 0.0f64;
    for i in 1..=n {
        let s = ((x ^ mask) >> (i - 1)) & 1 == 0;
        let c = if s { 1.0 } else { 0.5 };
        m = -0.5 * m + c;
    }
    m
}

/// The same expectation assembled from a constant term and per-bit
/// coefficients, `m_N = A_N + sum_k alpha_k X_k`.
pub fn nandnor_closed_form(x: u32, n: u32) -> f64 {
    let st = ChainState::analyze(x, n);
    st.a_n + (1..=n).map(|k| if (x >> (k - 1)) & 1 == 1 { st.alpha[k as usize - 1] } else { 0.0 }).sum::<f64>()
}

/// Bookkeeping for one input word: per-stage selection, constants and
/// expectations, plus the closed-form constant and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub n: u32,
    pub mask: u32,
    /// `s_i` for i = 1..=N (true when the stage acts as NAND).
    pub s: Vec<bool>,
    /// `c_i` for i = 1..=N.
    pub c: Vec<f64>,
    /// `m_i` for i = 0..=N.
    pub m: Vec<f64>,
    pub a_n: f64,
    /// `alpha_k` for k = 1..=N.
    pub alpha: Vec<f64>,
}

impl ChainState {
    pub fn analyze(x: u32, n: u32) -> Self {
        let mask = inverter_mask(n);
        let s: Vec<bool> = (0..n).map(|i| ((x ^ mask) >> i) & 1 == 0).collect();
        let c: Vec<f64> = s.iter().map(|&si| if si { 1.0 } else { 0.5 }).collect();
        let mut m = vec![0.0];
        for ci in &c {
            let prev = *m.last().unwrap();
            m.push(-0.5 * prev + ci);
        }
        // Stage i contributes (-1/2)^(N-i) c_i. With s_i = X_i for inverted
        // stages and 1 - X_i otherwise, c_i splits into a constant and an
        // X_i term of +-1/2.
        let w = |i: u32| (-0.5f64).powi((n - i) as i32);
        let mut a_n = 0.0;
        let mut alpha = Vec::with_capacity(n as usize);
        for i in 1..=n {
            let inverted = (mask >> (i - 1)) & 1 == 1;
            let (konst, coef) = if inverted { (0.5, 0.5) } else { (1.0, -0.5) };
            a_n += w(i) * konst;
            alpha.push(w(i) * coef);
        }
        Self { n, mask, s, c, m, a_n, alpha }
    }
}

/// The constant term exactly as printed in the even-`N` derivation. It is
/// only defined for even `N`.
pub fn printed_constant_even(n: u32) -> Option<f64> {
    if n < 2 || n % 2 == 1 {
        return None;
    }
    let w = |k: u32| (-0.5f64).powi((n - k) as i32);
    let first = (-0.5f64).powi(n as i32 - 1);
    let all: f64 = (2..=n).map(w).sum();
    let odd: f64 = (3..n).filter(|k| k % 2 == 1).map(w).sum();
    Some(first + 0.5 * all + 0.5 * odd)
}

/// Ones produced by `spec` for input `x` over every random word in
/// `[0, 2^N)`, by direct gate-level evaluation.
pub fn enumerate_ones(spec: &PccSpec, x: u32) -> u64 {
    let n = spec.precision();
    match spec.kind() {
        PccKind::Comparator => (0..1u32 << n).filter(|&r| cmp_bit(x, r)).count() as u64,
        _ if n < 6 => (0..1u32 << n).filter(|&r| spec.bit(x, r)).count() as u64,
        _ => enumerate_sliced(spec, x),
    }
}

/// 64 random words per pass: bits `R_1..R_6` vary across the lanes of a
/// block, the higher `R_i` are constant within it.
fn enumerate_sliced(spec: &PccSpec, x: u32) -> u64 {
    const LANE: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let n = spec.precision();
    let blocks = 1u32 << (n - 6);
    let ctl = match spec.kind() {
        PccKind::NandNorChain => x ^ spec.mask(),
        _ => x,
    };
    let mut ones = 0u64;
    for b in 0..blocks {
        let mut o = 0u64;
        for i in 0..n {
            let r = if i < 6 {
                LANE[i as usize]
            } else if (b >> (i - 6)) & 1 == 1 {
                u64::MAX
            } else {
                0
            };
            let sel = (ctl >> i) & 1 == 1;
            o = match spec.kind() {
                PccKind::NandNorChain if sel => !(o | r),
                PccKind::NandNorChain => !(o & r),
                _ if sel => o | r,
                _ => o & !r,
            };
        }
        ones += u64::from(o.count_ones());
    }
    ones
}

/// Convert `x` into `k` bits, one per source word. The result is unipolar;
/// relabel it for bipolar use.
pub fn generate_stream<S: RandomSource + ?Sized>(
    spec: &PccSpec,
    x: u32,
    k: usize,
    source: &mut S,
) -> Result<Bitstream> {
    if source.width() < spec.precision() {
        return Err(Error::SourceTooNarrow { have: source.width(), need: spec.precision() });
    }
    spec.check_word(x)?;
    Bitstream::from_bits((0..k).map(|_| spec.bit(x, source.next_word())), Encoding::Unipolar)
}

/// Convert `x` against a pre-drawn random word sequence.
pub fn stream_from_words(spec: &PccSpec, x: u32, words: &[u32]) -> Result<Bitstream> {
    spec.check_word(x)?;
    Bitstream::from_bits(words.iter().map(|&r| spec.bit(x, r)), Encoding::Unipolar)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "N")]
    pub n: u32,
    pub pcc_kind: PccKind,
    #[serde(rename = "X")]
    pub x: u32,
    pub expected_value: f64,
}

/// Noise-free transfer curve of one circuit over all inputs `[0, 2^N)`.
pub fn conversion_curve(kind: PccKind, n: u32) -> Result<Vec<CurvePoint>> {
    let spec = PccSpec::new(kind, n)?;
    Ok((0..1u32 << n).map(|x| CurvePoint { n, pcc_kind: kind, x, expected_value: spec.expected(x) }).collect())
}

/// Result of checking one `(N, X)` pair of the NAND-NOR chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "X")]
    pub x: u32,
    pub enumerated_ones: u64,
    pub recurrence_numerator: i64,
    pub enumerated: f64,
    pub recurrence: f64,
    pub closed_form: f64,
    pub mux_chain: f64,
    pub abs_error: f64,
    pub pass: bool,
}

/// Exhaustively enumerate the chain for every input word of each precision
/// and compare against the recurrence and the closed form.
pub fn verify_chain(ns: &[u32], mask_override: Option<u32>, tol: f64) -> Result<Vec<LemmaRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let mut spec = PccSpec::new(PccKind::NandNorChain, n)?;
        if let Some(m) = mask_override {
            spec = spec.with_inverter_mask(m);
        }
        let denom = (1u64 << n) as f64;
        let part: Vec<LemmaRow> = (0..1u32 << n)
            .into_par_iter()
            .map(|x| {
                let ones = enumerate_ones(&spec, x);
                let num = recurrence_numerator(x, n, inverter_mask(n));
                let enumerated = ones as f64 / denom;
                let recurrence = nandnor_expected(x, n);
                let closed_form = nandnor_closed_form(x, n);
                let abs_error = (enumerated - recurrence).abs().max((enumerated - closed_form).abs());
                LemmaRow {
                    n,
                    x,
                    enumerated_ones: ones,
                    recurrence_numerator: num,
                    enumerated,
                    recurrence,
                    closed_form,
                    mux_chain: mux_chain_probability(x, n),
                    abs_error,
                    pass: ones as i64 == num && abs_error <= tol,
                }
            })
            .collect();
        rows.extend(part);
    }
    Ok(rows)
}
