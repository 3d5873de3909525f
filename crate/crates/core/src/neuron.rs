//! The 25-input SC neuron: XNOR multipliers into a parallel counter, a
//! per-cycle B2S re-encoder, and OR-based ReLU / max-pooling on correlated
//! streams.
//!
//! B2S compares `2 * count` against `R` uniform on `[0, 2 * max)`. The
//! doubled range gives the midpoint `max / 2` an exact threshold, which the
//! bipolar zero used by ReLU needs when `max` is odd (25).

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::bitstream::{Bitstream, Encoding, GroupId};
use crate::counter::{unpack_planes, ApcTree};
use crate::error::{Error, Result};
use crate::pcc::{PccKind, PccSpec};
use crate::rns::{sample_below, RandomSource};

pub const MAC_INPUTS: usize = 25;

fn apc25() -> &'static ApcTree {
    static TREE: OnceLock<ApcTree> = OnceLock::new();
    TREE.get_or_init(|| ApcTree::new(MAC_INPUTS).expect("25-input counter"))
}

/// Word for a bipolar value at precision `n`: `round((v + 1) 2^(n-1))`,
/// clamped to what `spec` accepts.
pub fn bipolar_word(spec: &PccSpec, v: f64) -> u32 {
    let n = spec.precision();
    let w = ((v + 1.0) * f64::from(1u32 << (n - 1))).round();
    w.clamp(0.0, f64::from(spec.max_word())) as u32
}

/// Value represented by a bipolar word.
pub fn bipolar_value(word: u32, n: u32) -> f64 {
    f64::from(word) / f64::from(1u32 << (n - 1)) - 1.0
}

/// A random word sequence shared, cycle by cycle, by every stream generated
/// from it. Words are uniform on `[0, range)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationGroup {
    id: GroupId,
    words: Vec<u32>,
    range: u64,
}

impl CorrelationGroup {
    /// `k` full-width words from `source`.
    pub fn draw<S: RandomSource + ?Sized>(id: GroupId, source: &mut S, k: usize) -> Self {
        let words = (0..k).map(|_| source.next_word()).collect();
        Self { id, words, range: 1u64 << source.width() }
    }

    /// `k` words uniform on `[0, m)` by rejection.
    pub fn draw_below<S: RandomSource + ?Sized>(id: GroupId, source: &mut S, k: usize, m: u64) -> Result<Self> {
        let words = (0..k).map(|_| sample_below(source, m)).collect::<Result<_>>()?;
        Ok(Self { id, words, range: m })
    }

    pub fn from_words(id: GroupId, words: Vec<u32>, range: u64) -> Self {
        Self { id, words, range }
    }

    pub fn id(&self) -> GroupId {
        self.id
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn words(&self) -> &[u32] {
        &self.words
    }

    /// Member stream for input word `x` through `spec`.
    pub fn stream(&self, spec: &PccSpec, x: u32, encoding: Encoding) -> Result<Bitstream> {
        if self.range < 1u64 << spec.precision() {
            return Err(Error::SourceTooNarrow { have: self.range.trailing_zeros(), need: spec.precision() });
        }
        spec.check_word(x)?;
        Ok(Bitstream::from_bits(self.words.iter().map(|&r| spec.bit(x, r)), encoding)?.in_group(self.id))
    }

    /// Member stream with bits `threshold > R`.
    pub fn threshold_stream(&self, threshold: u64, encoding: Encoding) -> Result<Bitstream> {
        Ok(Bitstream::from_bits(self.words.iter().map(|&r| threshold > u64::from(r)), encoding)?.in_group(self.id))
    }

    /// The bipolar zero of this group (probability one half).
    pub fn zero_stream(&self) -> Result<Bitstream> {
        if self.range % 2 == 1 {
            return Err(Error::Config(format!("range {} has no exact midpoint", self.range)));
        }
        self.threshold_stream(self.range / 2, Encoding::Bipolar)
    }
}

/// One MAC cycle: XNOR each pair and count the ones.
pub fn mac_cycle(act_bits: &[bool], weight_bits: &[bool]) -> Result<u32> {
    if act_bits.len() != MAC_INPUTS || weight_bits.len() != MAC_INPUTS {
        return Err(Error::ArityMismatch { expected: MAC_INPUTS, got: act_bits.len().min(weight_bits.len()) });
    }
    let xn: Vec<bool> = act_bits.iter().zip(weight_bits).map(|(a, w)| !(a ^ w)).collect();
    apc25().count(&xn)
}

/// Reusable buffers for [`accumulate_mac_counts`].
#[derive(Debug, Default)]
pub struct MacScratch {
    inputs: Vec<u64>,
    wires: Vec<u64>,
    lanes: Vec<u32>,
}

/// Add the per-cycle MAC counts of 25 (activation, weight) stream pairs to
/// `totals`. Streams are given as packed words; 64 cycles are evaluated per
/// pass of the adder network.
pub fn accumulate_mac_counts(
    acts: &[&[u64]],
    weights: &[&[u64]],
    k: usize,
    totals: &mut [u32],
    scratch: &mut MacScratch,
) -> Result<()> {
    if acts.len() != MAC_INPUTS || weights.len() != MAC_INPUTS {
        return Err(Error::ArityMismatch { expected: MAC_INPUTS, got: acts.len().min(weights.len()) });
    }
    if totals.len() < k {
        return Err(Error::LengthMismatch(totals.len(), k));
    }
    let tree = apc25();
    let mut planes = [0u64; 5];
    scratch.lanes.resize(64, 0);
    for (blk, chunk) in totals[..k].chunks_mut(64).enumerate() {
        scratch.inputs.clear();
        scratch.inputs.extend(acts.iter().zip(weights).map(|(a, w)| !(a[blk] ^ w[blk])));
        tree.count_lanes(&scratch.inputs, &mut scratch.wires, &mut planes)?;
        unpack_planes(&planes, chunk.len(), &mut scratch.lanes);
        for (t, c) in chunk.iter_mut().zip(&scratch.lanes) {
            *t += c;
        }
    }
    Ok(())
}

/// How an integer count is turned back into a stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum B2sMode {
    /// Each cycle's count becomes that cycle's output bit.
    #[default]
    PerCycle,
    /// Counts are summed over all `k` cycles and the total is re-encoded.
    Accumulated,
}

/// Range of the B2S random words for a neuron whose per-cycle count is at
/// most `max_count`.
pub fn b2s_range(mode: B2sMode, max_count: u64, k: usize) -> u64 {
    match mode {
        B2sMode::PerCycle => 2 * max_count,
        B2sMode::Accumulated => 2 * max_count * k as u64,
    }
}

/// Re-encode per-cycle counts (each at most `max_count`) as a bipolar
/// stream in `group`.
pub fn b2s_counts(counts: &[u32], max_count: u64, mode: B2sMode, group: &CorrelationGroup) -> Result<Bitstream> {
    let k = counts.len();
    if group.len() != k {
        return Err(Error::LengthMismatch(group.len(), k));
    }
    let want = b2s_range(mode, max_count, k);
    if group.range() != want {
        return Err(Error::Config(format!("B2S group range {} but {} required", group.range(), want)));
    }
    if let Some(&c) = counts.iter().find(|&&c| u64::from(c) > max_count) {
        return Err(Error::CountOutOfRange { count: u64::from(c), max: max_count });
    }
    match mode {
        B2sMode::PerCycle => group.threshold_stream_by(counts.iter().map(|&c| 2 * u64::from(c))),
        B2sMode::Accumulated => {
            let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
            group.threshold_stream(2 * total, Encoding::Bipolar)
        }
    }
}

impl CorrelationGroup {
    fn threshold_stream_by<I: Iterator<Item = u64>>(&self, thresholds: I) -> Result<Bitstream> {
        let bits = thresholds.zip(&self.words).map(|(t, &r)| t > u64::from(r));
        Ok(Bitstream::from_bits(bits, Encoding::Bipolar)?.in_group(self.id))
    }
}

/// One MAC's worth of activations and weights, encoded as PCC words. Unused
/// slots hold the bipolar zero on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScNeuron {
    pub activations: Vec<u32>,
    pub weights: Vec<u32>,
    pub act_pcc: PccSpec,
    pub weight_pcc: PccSpec,
    pub k: usize,
    pub b2s_mode: B2sMode,
}

impl ScNeuron {
    pub fn new(activations: &[f64], weights: &[f64], act_pcc: PccSpec, weight_pcc: PccSpec, k: usize) -> Result<Self> {
        if activations.len() != weights.len() || activations.len() > MAC_INPUTS {
            return Err(Error::ArityMismatch { expected: MAC_INPUTS, got: activations.len().max(weights.len()) });
        }
        if activations.iter().chain(weights).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("neuron operands"));
        }
        if k == 0 {
            return Err(Error::EmptyStream);
        }
        let pad = |spec: &PccSpec, vals: &[f64]| {
            let mut w: Vec<u32> = vals.iter().map(|&v| bipolar_word(spec, v)).collect();
            w.resize(MAC_INPUTS, bipolar_word(spec, 0.0));
            w
        };
        Ok(Self {
            activations: pad(&act_pcc, activations),
            weights: pad(&weight_pcc, weights),
            act_pcc,
            weight_pcc,
            k,
            b2s_mode: B2sMode::PerCycle,
        })
    }

    pub fn with_b2s_mode(mut self, mode: B2sMode) -> Self {
        self.b2s_mode = mode;
        self
    }

    /// `sum a_i w_i / 25` over the encoded operands, where each operand is
    /// the expected bipolar value its PCC produces.
    pub fn expected(&self) -> f64 {
        let val = |spec: &PccSpec, x: u32| 2.0 * spec.expected(x) - 1.0;
        self.activations
            .iter()
            .zip(&self.weights)
            .map(|(&a, &w)| val(&self.act_pcc, a) * val(&self.weight_pcc, w))
            .sum::<f64>()
            / MAC_INPUTS as f64
    }

    /// Per-cycle APC counts.
    pub fn counts(&self, acts: &CorrelationGroup, weights: &CorrelationGroup) -> Result<Vec<u32>> {
        if acts.len() != self.k || weights.len() != self.k {
            return Err(Error::LengthMismatch(acts.len().min(weights.len()), self.k));
        }
        let a: Vec<Bitstream> = self
            .activations
            .iter()
            .map(|&x| acts.stream(&self.act_pcc, x, Encoding::Bipolar))
            .collect::<Result<_>>()?;
        let w: Vec<Bitstream> = self
            .weights
            .iter()
            .map(|&x| weights.stream(&self.weight_pcc, x, Encoding::Bipolar))
            .collect::<Result<_>>()?;
        let aw: Vec<&[u64]> = a.iter().map(|s| s.words()).collect();
        let ww: Vec<&[u64]> = w.iter().map(|s| s.words()).collect();
        let mut totals = vec![0u32; self.k];
        accumulate_mac_counts(&aw, &ww, self.k, &mut totals, &mut MacScratch::default())?;
        Ok(totals)
    }

    pub fn forward(
        &self,
        acts: &CorrelationGroup,
        weights: &CorrelationGroup,
        b2s: &CorrelationGroup,
    ) -> Result<Bitstream> {
        let counts = self.counts(acts, weights)?;
        b2s_counts(&counts, MAC_INPUTS as u64, self.b2s_mode, b2s)
    }
}

/// Draw the three random sequences from their sources and run the neuron.
/// The output stream belongs to correlation group `b2s_group`.
pub fn neuron_forward<A, W, B>(
    neuron: &ScNeuron,
    source_a: &mut A,
    source_w: &mut W,
    source_b2s: &mut B,
    b2s_group: GroupId,
) -> Result<Bitstream>
where
    A: RandomSource + ?Sized,
    W: RandomSource + ?Sized,
    B: RandomSource + ?Sized,
{
    let k = neuron.k;
    let ga = CorrelationGroup::draw(u64::MAX - 1, source_a, k);
    let gw = CorrelationGroup::draw(u64::MAX - 2, source_w, k);
    let range = b2s_range(neuron.b2s_mode, MAC_INPUTS as u64, k);
    let gb = CorrelationGroup::draw_below(b2s_group, source_b2s, k, range)?;
    neuron.forward(&ga, &gw, &gb)
}

fn same_group(streams: &[&Bitstream]) -> Result<()> {
    let first = streams[0];
    for s in streams {
        if s.encoding() != Encoding::Bipolar {
            return Err(Error::EncodingMismatch { expected: Encoding::Bipolar, found: s.encoding() });
        }
        if s.len() != first.len() {
            return Err(Error::LengthMismatch(first.len(), s.len()));
        }
        if s.group().is_none() || s.group() != first.group() {
            return Err(Error::CorrelationMismatch);
        }
    }
    Ok(())
}

/// `max(x, 0)` as the OR of `x` with a correlated bipolar zero.
pub fn relu(x: &Bitstream, zero: &Bitstream) -> Result<Bitstream> {
    same_group(&[x, zero])?;
    x.or_combine(zero)
}

/// Maximum of correlated streams as their OR.
pub fn max_pool(streams: &[&Bitstream]) -> Result<Bitstream> {
    if streams.is_empty() {
        return Err(Error::ArityMismatch { expected: 1, got: 0 });
    }
    same_group(streams)?;
    let mut acc = streams[0].clone();
    for s in &streams[1..] {
        acc = acc.or_combine(s)?;
    }
    Ok(acc)
}

/// Comparator spec at precision `n`, the circuit used inside correlation groups.
pub fn comparator(n: u32) -> Result<PccSpec> {
    PccSpec::new(PccKind::Comparator, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstream::binomial_sigma;
    use crate::rns::{IdealSource, Lfsr};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sources(seed: u64) -> (IdealSource, IdealSource, IdealSource) {
        (
            IdealSource::derive(seed, 0, 16).unwrap(),
            IdealSource::derive(seed, 1, 16).unwrap(),
            IdealSource::derive(seed, 2, 16).unwrap(),
        )
    }

    #[test]
    fn mac_cycle_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<bool> = (0..25).map(|_| rng.random()).collect();
        let na: Vec<bool> = a.iter().map(|b| !b).collect();
        assert_eq!(mac_cycle(&a, &a).unwrap(), 25);
        assert_eq!(mac_cycle(&a, &na).unwrap(), 0);
        assert!(mac_cycle(&a[..24], &a[..24]).is_err());
        for _ in 0..100_000 {
            let x: u32 = rng.random_range(0..1 << 25);
            let y: u32 = rng.random_range(0..1 << 25);
            let xa: Vec<bool> = (0..25).map(|i| (x >> i) & 1 == 1).collect();
            let ya: Vec<bool> = (0..25).map(|i| (y >> i) & 1 == 1).collect();
            assert_eq!(mac_cycle(&xa, &ya).unwrap(), (!(x ^ y) & ((1 << 25) - 1)).count_ones());
        }
    }

    #[test]
    fn word_encoding() {
        let c8 = comparator(8).unwrap();
        assert_eq!(bipolar_word(&c8, 1.0), 256);
        assert_eq!(bipolar_word(&c8, -1.0), 0);
        assert_eq!(bipolar_word(&c8, 0.0), 128);
        assert_eq!(bipolar_value(192, 8), 0.5);
        let m8 = PccSpec::new(PccKind::MuxChain, 8).unwrap();
        assert_eq!(bipolar_word(&m8, 1.0), 255);
    }

    #[test]
    fn saturated_neuron() {
        let c = comparator(8).unwrap();
        let n = ScNeuron::new(&[1.0; 25], &[1.0; 25], c, c, 4096).unwrap();
        let (mut a, mut w, mut b) = sources(1);
        let out = neuron_forward(&n, &mut a, &mut w, &mut b, 9).unwrap();
        assert_eq!(out.decode(), 1.0);
        assert_eq!(out.group(), Some(9));
    }

    #[test]
    fn zero_activations() {
        let c = comparator(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = ScNeuron::new(&[0.0; 25], &w, c, c, 4096).unwrap();
        assert_eq!(n.expected(), 0.0);
        let (mut a, mut ws, mut b) = sources(4);
        let out = neuron_forward(&n, &mut a, &mut ws, &mut b, 0).unwrap();
        assert!(out.decode().abs() <= 3.0 * binomial_sigma(0.5, 4096, Encoding::Bipolar));
    }

    #[test]
    fn single_product_pair() {
        let c = comparator(8).unwrap();
        let mut acts = vec![1.0];
        let mut ws = vec![1.0];
        acts.extend([0.25, -0.5, 0.75]);
        ws.extend([0.5, 0.5, -1.0]);
        let n = ScNeuron::new(&acts, &ws, c, c, 4096).unwrap();
        let want = (1.0 + 0.125 - 0.25 - 0.75) / 25.0;
        assert!((n.expected() - want).abs() < 1e-12);
        let (mut a, mut w, mut b) = sources(5);
        let out = neuron_forward(&n, &mut a, &mut w, &mut b, 0).unwrap();
        let p = (1.0 + want) / 2.0;
        assert!((out.decode() - want).abs() <= 3.0 * binomial_sigma(p, 4096, Encoding::Bipolar));
    }

    #[test]
    fn dot_product_convergence() {
        let c = comparator(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut medians = Vec::new();
        for (ki, k) in [32usize, 256, 4096].into_iter().enumerate() {
            let mut errs = Vec::new();
            let mut within = 0;
            for d in 0..100 {
                let a: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
                let w: Vec<f64> = (0..25).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = ScNeuron::new(&a, &w, c, c, k).unwrap();
                let (mut sa, mut sw, mut sb) = sources(1000 * ki as u64 + d);
                let out = neuron_forward(&n, &mut sa, &mut sw, &mut sb, 0).unwrap();
                let want = n.expected();
                let err = (out.decode() - want).abs();
                if err <= 3.0 * binomial_sigma((1.0 + want) / 2.0, k, Encoding::Bipolar) {
                    within += 1;
                }
                errs.push(err);
            }
            assert!(within >= 95, "k={k}: {within}/100 within 3 sigma");
            errs.sort_by(f64::total_cmp);
            medians.push(errs[50]);
        }
        assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
    }

    #[test]
    fn swapped_seeds_keep_contract() {
        let c = comparator(8).unwrap();
        let a: Vec<f64> = (0..25).map(|i| (i as f64 / 12.5) - 1.0).collect();
        let w: Vec<f64> = (0..25).map(|i| 1.0 - (i as f64 / 20.0)).collect();
        let n = ScNeuron::new(&a, &w, c, c, 4096).unwrap();
        let want = n.expected();
        let tol = 3.0 * binomial_sigma((1.0 + want) / 2.0, 4096, Encoding::Bipolar);
        let (mut s0, mut s1, mut sb) = sources(8);
        let one = neuron_forward(&n, &mut s0.clone(), &mut s1.clone(), &mut sb.clone(), 0).unwrap();
        let two = neuron_forward(&n, &mut s1, &mut s0, &mut sb, 0).unwrap();
        assert_ne!(one, two);
        assert!((one.decode() - want).abs() <= tol);
        assert!((two.decode() - want).abs() <= tol);
    }

    #[test]
    fn accumulated_b2s() {
        let c = comparator(8).unwrap();
        let a: Vec<f64> = (0..25).map(|i| ((i * 7) % 25) as f64 / 12.5 - 1.0).collect();
        let w: Vec<f64> = (0..25).map(|i| ((i * 11) % 25) as f64 / 25.0 - 0.5).collect();
        let n = ScNeuron::new(&a, &w, c, c, 4096).unwrap().with_b2s_mode(B2sMode::Accumulated);
        let (mut sa, mut sw, _) = sources(12);
        let mut narrow = IdealSource::derive(12, 2, 16).unwrap();
        assert!(matches!(
            neuron_forward(&n, &mut sa.clone(), &mut sw.clone(), &mut narrow, 0),
            Err(Error::SourceTooNarrow { .. })
        ));
        let mut sb = IdealSource::derive(12, 2, 32).unwrap();
        let out = neuron_forward(&n, &mut sa, &mut sw, &mut sb, 0).unwrap();
        let want = n.expected();
        // two stages of binomial noise
        assert!((out.decode() - want).abs() <= 4.5 * binomial_sigma((1.0 + want) / 2.0, 4096, Encoding::Bipolar));
    }

    #[test]
    fn relu_examples() {
        let c = comparator(8).unwrap();
        let mut src = IdealSource::new(21, 8).unwrap();
        for k in [8usize, 33, 256, 1000] {
            let g = CorrelationGroup::draw(1, &mut src, k);
            let zero = g.stream(&c, bipolar_word(&c, 0.0), Encoding::Bipolar).unwrap();
            let pos = g.stream(&c, bipolar_word(&c, 1.0), Encoding::Bipolar).unwrap();
            assert_eq!(relu(&pos, &zero).unwrap(), pos);
            let neg = g.stream(&c, 0, Encoding::Bipolar).unwrap();
            assert_eq!(relu(&neg, &zero).unwrap(), zero);
            let x = g.stream(&c, bipolar_word(&c, -0.4), Encoding::Bipolar).unwrap();
            let r = relu(&x, &zero).unwrap();
            assert_eq!(r.decode(), x.decode().max(zero.decode()));
            assert_eq!(r, zero);
        }
        // over one full LFSR period the zero stream is exactly balanced up
        // to the missing all-zero word
        let mut l = Lfsr::maximal(8, 1).unwrap();
        let g = CorrelationGroup::draw(2, &mut l, 255);
        let zero = g.stream(&c, 128, Encoding::Bipolar).unwrap();
        assert_eq!(zero.count_ones(), 127);
    }

    #[test]
    fn relu_rejects_foreign_streams() {
        let c = comparator(8).unwrap();
        let mut src = IdealSource::new(3, 8).unwrap();
        let g1 = CorrelationGroup::draw(1, &mut src, 64);
        let g2 = CorrelationGroup::draw(2, &mut src, 64);
        let x = g1.stream(&c, 100, Encoding::Bipolar).unwrap();
        let z = g2.stream(&c, 128, Encoding::Bipolar).unwrap();
        assert!(matches!(relu(&x, &z), Err(Error::CorrelationMismatch)));
        let untagged = crate::pcc::generate_stream(&c, 128, 64, &mut src).unwrap().relabel(Encoding::Bipolar);
        assert!(matches!(relu(&x, &untagged), Err(Error::CorrelationMismatch)));
    }

    #[test]
    fn max_pool_examples() {
        let c = comparator(8).unwrap();
        let mut src = IdealSource::new(4, 8).unwrap();
        let g = CorrelationGroup::draw(7, &mut src, 256);
        let s: Vec<Bitstream> = [0.1, 0.5, 0.3, 0.2]
            .iter()
            .map(|&v| g.stream(&c, bipolar_word(&c, v), Encoding::Bipolar).unwrap())
            .collect();
        let refs: Vec<&Bitstream> = s.iter().collect();
        let m = max_pool(&refs).unwrap();
        assert_eq!(m, s[1]);
        assert_eq!(m.decode(), refs.iter().map(|x| x.decode()).fold(f64::MIN, f64::max));
        assert_eq!(max_pool(&[&s[2]]).unwrap(), s[2]);
        assert_eq!(max_pool(&[&s[1], &s[1], &s[0]]).unwrap(), s[1]);
        assert!(max_pool(&[]).is_err());
    }

    #[test]
    fn per_cycle_zero_is_exact_midpoint() {
        let mut src = IdealSource::new(5, 16).unwrap();
        let g = CorrelationGroup::draw_below(3, &mut src, 5000, 50).unwrap();
        let z = g.zero_stream().unwrap();
        let zero_counts = vec![0u32; 5000];
        let half: Vec<u32> = vec![25; 5000];
        assert_eq!(b2s_counts(&half, 25, B2sMode::PerCycle, &g).unwrap().count_ones(), 5000);
        assert_eq!(b2s_counts(&zero_counts, 25, B2sMode::PerCycle, &g).unwrap().count_ones(), 0);
        assert!((z.decode()).abs() <= 3.0 * binomial_sigma(0.5, 5000, Encoding::Bipolar));
        assert!(b2s_counts(&half, 24, B2sMode::PerCycle, &g).is_err());
    }
}
