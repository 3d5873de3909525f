//! Full adders, the accumulative parallel counter, the adder tree and the
//! stochastic/binary converters.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bitstream::{decode_count, Bitstream, Encoding};
use crate::error::{Error, Result};
use crate::pcc::inverter_mask;
use crate::rns::{sample_below, RandomSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FullAdderResult {
    pub sum: bool,
    pub carry: bool,
}

/// XOR3 / MAJ3.
#[inline]
pub fn full_add(a: bool, b: bool, cin: bool) -> FullAdderResult {
    FullAdderResult { sum: a ^ b ^ cin, carry: (a & b) | (cin & (a ^ b)) }
}

#[inline]
pub fn half_add(a: bool, b: bool) -> FullAdderResult {
    FullAdderResult { sum: a ^ b, carry: a & b }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Full { a: u32, b: u32, c: u32, sum: u32, carry: u32 },
    Half { a: u32, b: u32, sum: u32, carry: u32 },
}

/// Exact parallel counter built from full and half adders.
///
/// Construction works column by column from the least-significant weight.
/// Each column is a FIFO of wires; three wires at the front feed a full
/// adder whose sum rejoins the back of the column and whose carry moves to
/// the next column. A column left with two wires gets a half adder. The
/// FIFO order makes early layers combine primary inputs before partial sums,
/// which gives the usual logarithmic-depth Wallace shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApcTree {
    n_inputs: usize,
    gates: Vec<Gate>,
    n_wires: usize,
    outputs: Vec<u32>,
}

impl ApcTree {
    pub fn new(n_inputs: usize) -> Result<Self> {
        if n_inputs == 0 {
            return Err(Error::ArityMismatch { expected: 1, got: 0 });
        }
        let mut next = n_inputs as u32;
        let mut fresh = || {
            next += 1;
            next - 1
        };
        let mut gates = Vec::new();
        let mut outputs = Vec::new();
        let mut cols: Vec<VecDeque<u32>> = vec![(0..n_inputs as u32).collect()];
        let mut j = 0;
        while j < cols.len() {
            let mut carries = Vec::new();
            while cols[j].len() >= 3 {
                let a = cols[j].pop_front().unwrap();
                let b = cols[j].pop_front().unwrap();
                let c = cols[j].pop_front().unwrap();
                let (sum, carry) = (fresh(), fresh());
                gates.push(Gate::Full { a, b, c, sum, carry });
                cols[j].push_back(sum);
                carries.push(carry);
            }
            if cols[j].len() == 2 {
                let a = cols[j].pop_front().unwrap();
                let b = cols[j].pop_front().unwrap();
                let (sum, carry) = (fresh(), fresh());
                gates.push(Gate::Half { a, b, sum, carry });
                cols[j].push_back(sum);
                carries.push(carry);
            }
            outputs.push(cols[j][0]);
            if !carries.is_empty() {
                if cols.len() == j + 1 {
                    cols.push(VecDeque::new());
                }
                cols[j + 1].extend(carries);
            }
            j += 1;
        }
        Ok(Self { n_inputs, gates, n_wires: next as usize, outputs })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    /// Bits in the count, `ceil(log2(n + 1))`.
    pub fn output_width(&self) -> usize {
        self.outputs.len()
    }

    pub fn fa_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Full { .. })).count()
    }

    pub fn ha_count(&self) -> usize {
        self.gates.len() - self.fa_count()
    }

    pub fn gate_counts(&self) -> GateCounts {
        GateCounts {
            block: format!("apc{}", self.n_inputs),
            fa_count: self.fa_count(),
            ha_count: self.ha_count(),
            inverter_count: 0,
        }
    }

    /// Swap the sum and carry outputs of one gate. Used to check that the
    /// verification harness notices a broken network.
    pub fn inject_fault(&mut self, gate: usize) {
        let g = gate % self.gates.len();
        match &mut self.gates[g] {
            Gate::Full { sum, carry, .. } | Gate::Half { sum, carry, .. } => std::mem::swap(sum, carry),
        }
    }

    /// Count the ones among `inputs` by evaluating the adder network.
    pub fn count(&self, inputs: &[bool]) -> Result<u32> {
        if inputs.len() != self.n_inputs {
            return Err(Error::ArityMismatch { expected: self.n_inputs, got: inputs.len() });
        }
        let mut w = vec![false; self.n_wires];
        w[..self.n_inputs].copy_from_slice(inputs);
        for g in &self.gates {
            match *g {
                Gate::Full { a, b, c, sum, carry } => {
                    let r = full_add(w[a as usize], w[b as usize], w[c as usize]);
                    w[sum as usize] = r.sum;
                    w[carry as usize] = r.carry;
                }
                Gate::Half { a, b, sum, carry } => {
                    let r = half_add(w[a as usize], w[b as usize]);
                    w[sum as usize] = r.sum;
                    w[carry as usize] = r.carry;
                }
            }
        }
        Ok(self.outputs.iter().enumerate().map(|(i, &o)| u32::from(w[o as usize]) << i).sum())
    }

    /// Evaluate 64 independent cycles at once. `inputs[i]` holds input `i`
    /// for each lane; `planes[b]` receives bit `b` of every lane's count.
    /// `wires` is scratch space reused between calls.
    pub fn count_lanes(&self, inputs: &[u64], wires: &mut Vec<u64>, planes: &mut [u64]) -> Result<()> {
        if inputs.len() != self.n_inputs {
            return Err(Error::ArityMismatch { expected: self.n_inputs, got: inputs.len() });
        }
        if planes.len() < self.outputs.len() {
            return Err(Error::ArityMismatch { expected: self.outputs.len(), got: planes.len() });
        }
        wires.clear();
        wires.extend_from_slice(inputs);
        wires.resize(self.n_wires, 0);
        for g in &self.gates {
            match *g {
                Gate::Full { a, b, c, sum, carry } => {
                    let (x, y, z) = (wires[a as usize], wires[b as usize], wires[c as usize]);
                    wires[sum as usize] = x ^ y ^ z;
                    wires[carry as usize] = (x & y) | (z & (x ^ y));
                }
                Gate::Half { a, b, sum, carry } => {
                    let (x, y) = (wires[a as usize], wires[b as usize]);
                    wires[sum as usize] = x ^ y;
                    wires[carry as usize] = x & y;
                }
            }
        }
        for (p, &o) in planes.iter_mut().zip(&self.outputs) {
            *p = wires[o as usize];
        }
        Ok(())
    }
}

/// Per-lane integer values from bit planes (lane `t` of the result is
/// `sum_b planes[b] bit t << b`).
pub fn unpack_planes(planes: &[u64], lanes: usize, out: &mut [u32]) {
    let out = &mut out[..lanes];
    out.fill(0);
    for (b, &p) in planes.iter().enumerate() {
        for (t, o) in out.iter_mut().enumerate() {
            *o |= (((p >> t) & 1) as u32) << b;
        }
    }
}

/// Multi-operand adder combining APC outputs of a wide neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdderTreeSpec {
    fan_in: usize,
    bypass: bool,
}

impl AdderTreeSpec {
    pub fn new(fan_in: usize, bypass: bool) -> Result<Self> {
        if bypass {
            return Ok(Self { fan_in: 1, bypass });
        }
        if fan_in == 0 || !fan_in.is_power_of_two() {
            return Err(Error::Config(format!("adder tree fan-in {fan_in} is not a power of two")));
        }
        Ok(Self { fan_in, bypass })
    }

    /// Smallest tree that takes `groups` inputs; bypassed for one group.
    pub fn for_groups(groups: usize) -> Self {
        if groups <= 1 {
            Self { fan_in: 1, bypass: true }
        } else {
            Self { fan_in: groups.next_power_of_two(), bypass: false }
        }
    }

    pub fn fan_in(&self) -> usize {
        self.fan_in
    }

    pub fn bypass(&self) -> bool {
        self.bypass
    }

    /// Gates of a binary tree of ripple-carry adders over `width`-bit inputs.
    pub fn gate_counts(&self, width: usize) -> GateCounts {
        let mut fa = 0;
        let mut ha = 0;
        let mut n = self.fan_in;
        let mut w = width;
        while !self.bypass && n > 1 {
            n /= 2;
            fa += n * (w - 1);
            ha += n;
            w += 1;
        }
        GateCounts {
            block: format!("adder_tree{}x{}", self.fan_in, width),
            fa_count: fa,
            ha_count: ha,
            inverter_count: 0,
        }
    }
}

pub fn adder_tree_sum(spec: &AdderTreeSpec, counts: &[u32]) -> Result<u64> {
    if spec.bypass {
        return match counts {
            [c] => Ok(u64::from(*c)),
            _ => Err(Error::ArityMismatch { expected: 1, got: counts.len() }),
        };
    }
    if counts.len() != spec.fan_in {
        return Err(Error::ArityMismatch { expected: spec.fan_in, got: counts.len() });
    }
    let mut level: Vec<u64> = counts.iter().map(|&c| u64::from(c)).collect();
    while level.len() > 1 {
        level = level.chunks(2).map(|p| p[0] + p[1]).collect();
    }
    Ok(level[0])
}

/// Ones-count over `k` cycles; the value is `ones / k` (or its bipolar map).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPoint {
    pub ones: u64,
    pub k: u64,
    pub encoding: Encoding,
}

impl FixedPoint {
    pub fn value(&self) -> f64 {
        decode_count(self.ones, self.k, self.encoding)
    }

    /// Fractional bits needed to hold `ones / k` exactly when `k` is a power of two.
    pub fn frac_bits(&self) -> u32 {
        64 - self.k.saturating_sub(1).leading_zeros()
    }
}

pub fn s2b(stream: &Bitstream) -> FixedPoint {
    FixedPoint { ones: stream.count_ones(), k: stream.len() as u64, encoding: stream.encoding() }
}

/// Re-encode a binary count: each cycle emits `count > R` with `R` uniform
/// on `[0, max_count)`.
pub fn b2s<S: RandomSource + ?Sized>(count: u64, max_count: u64, k: usize, source: &mut S) -> Result<Bitstream> {
    if count > max_count {
        return Err(Error::CountOutOfRange { count, max: max_count });
    }
    if max_count == 0 {
        return Err(Error::Config("b2s range must be positive".into()));
    }
    let mut bits = Vec::with_capacity(k);
    for _ in 0..k {
        bits.push(count > u64::from(sample_below(source, max_count)?));
    }
    Bitstream::from_bits(bits, Encoding::Unipolar)
}

/// One row of the gate-count report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub block: String,
    pub fa_count: usize,
    pub ha_count: usize,
    pub inverter_count: usize,
}

/// NAND-NOR chain inverters: the masked `X_i` lines plus the two fixed
/// inverters on the output and random-input paths.
pub fn nandnor_gate_counts(n: u32) -> GateCounts {
    GateCounts {
        block: format!("pcc_nandnor{n}"),
        fa_count: 0,
        ha_count: 0,
        inverter_count: inverter_mask(n).count_ones() as usize + 2,
    }
}

/// Blocks referenced by the accelerator cost model.
pub fn gate_report(n_bits: u32, mac_inputs: usize, adder_fan_in: usize) -> Result<Vec<GateCounts>> {
    let apc = ApcTree::new(mac_inputs)?;
    let mut rows = vec![ApcTree::new(15)?.gate_counts()];
    if mac_inputs != 15 {
        rows.push(apc.gate_counts());
    }
    if mac_inputs != 25 {
        rows.push(ApcTree::new(25)?.gate_counts());
    }
    rows.push(AdderTreeSpec::new(adder_fan_in, false)?.gate_counts(apc.output_width()));
    rows.push(nandnor_gate_counts(n_bits));
    Ok(rows)
}

pub fn write_gate_report<W: Write>(rows: &[GateCounts], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_gate_report<R: std::io::Read>(r: R) -> Result<Vec<GateCounts>> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<std::result::Result<_, _>>()?)
}
