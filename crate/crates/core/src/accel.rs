//! Analytical model of a channel-replicated SC accelerator.
//!
//! Each channel holds 16 MAC units; a MAC unit evaluates one 25-input neuron
//! group per bitstream pass of `k` cycles. Operands stream from off-chip
//! memory, and the planner picks one of three pipelining regimes per layer
//! depending on how many neurons the memory can feed per clock.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::counter::{ApcTree, GateCounts};
use crate::error::{Error, Result};
use crate::network::{LayerSpec, QuantizedModel};
use crate::neuron::MAC_INPUTS;

pub const MACS_PER_CHANNEL: usize = 16;
/// Off-chip load rate of a 7 GHz GDDR5 interface, bytes per ns.
pub const DEFAULT_BANDWIDTH: f64 = 224.0;

/// Factors taking 7 nm library figures to an equivalent 10 nm node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub area: f64,
    pub delay: f64,
    pub power: f64,
}

pub const NODE_7_TO_10: Scaling = Scaling { area: 2.1, delay: 1.3, power: 1.4 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorConfig {
    pub channels: usize,
    pub macs_per_channel: usize,
    pub multipliers_per_mac: usize,
    pub clock_ns: f64,
    pub n_bits: u32,
    pub k: usize,
}

impl AcceleratorConfig {
    pub fn new(channels: usize, clock_ns: f64, n_bits: u32, k: usize) -> Result<Self> {
        let c =
            Self { channels, macs_per_channel: MACS_PER_CHANNEL, multipliers_per_mac: MAC_INPUTS, clock_ns, n_bits, k };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels == 0
            || self.macs_per_channel == 0
            || self.multipliers_per_mac == 0
            || self.n_bits == 0
            || self.k == 0
        {
            return Err(Error::Config("accelerator parameters must be positive".into()));
        }
        if !(self.clock_ns.is_finite() && self.clock_ns > 0.0) {
            return Err(Error::Config(format!("clock period {} ns", self.clock_ns)));
        }
        Ok(())
    }

    /// Neurons evaluated concurrently, one per MAC unit.
    pub fn n_onchip(&self) -> usize {
        self.channels * self.macs_per_channel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryModel {
    pub bandwidth_bytes_per_ns: f64,
    /// Count only the fresh activation column of a sliding conv window.
    #[serde(default)]
    pub activation_reuse: bool,
}

impl Default for MemoryModel {
    fn default() -> Self {
        Self { bandwidth_bytes_per_ns: DEFAULT_BANDWIDTH, activation_reuse: false }
    }
}

impl MemoryModel {
    pub fn new(bandwidth_bytes_per_ns: f64) -> Result<Self> {
        if !(bandwidth_bytes_per_ns.is_finite() && bandwidth_bytes_per_ns > 0.0) {
            return Err(Error::Config(format!("bandwidth {bandwidth_bytes_per_ns} B/ns")));
        }
        Ok(Self { bandwidth_bytes_per_ns, activation_reuse: false })
    }

    /// Operand bytes of one 25-input neuron group without reuse.
    pub fn bytes_per_neuron(n_bits: u32) -> f64 {
        (2 * MAC_INPUTS) as f64 * f64::from(n_bits) / 8.0
    }
}

/// MAC-group invocations of one weighted layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWorkload {
    pub name: String,
    pub n_neurons: usize,
    pub bytes_per_neuron: f64,
}

/// Workloads of every weighted layer: output neurons times MAC groups.
pub fn workloads(model: &QuantizedModel, mem: &MemoryModel, n_bits: u32) -> Result<Vec<LayerWorkload>> {
    let full = MemoryModel::bytes_per_neuron(n_bits);
    model
        .stages()?
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let spec = model.layers[st.layer].spec;
            let (name, bytes) = match spec {
                LayerSpec::Conv { kernel_w, stride, .. } => {
                    let act =
                        if mem.activation_reuse && stride < kernel_w { stride as f64 / kernel_w as f64 } else { 1.0 };
                    (format!("conv{}", i + 1), full * (1.0 + act) / 2.0)
                }
                _ => (format!("fc{}", i + 1), full),
            };
            Ok(LayerWorkload { name, n_neurons: st.neurons() * st.groups, bytes_per_neuron: bytes })
        })
        .collect()
}

/// Neurons the memory can supply operands for in one clock, at least one.
pub fn mem_cover(layer: &LayerWorkload, mem: &MemoryModel, clock_ns: f64) -> usize {
    let n = (mem.bandwidth_bytes_per_ns * clock_ns / layer.bytes_per_neuron).floor();
    if n < 1.0 {
        log::warn!(
            "{}: {:.1} B/ns x {clock_ns} ns cannot feed one neuron of {} B; using 1",
            layer.name,
            mem.bandwidth_bytes_per_ns,
            layer.bytes_per_neuron
        );
        return 1;
    }
    n as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineMode {
    NonPipelined,
    PartiallyPipelined,
    FullyPipelined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelinePlan {
    pub mode: PipelineMode,
    /// Neurons started per clock.
    pub n_parallel: usize,
    pub n_onchip: usize,
    pub n_memcover: usize,
    /// Clocks needed to load one full on-chip batch.
    pub incycle_pipe: usize,
    /// Sequential on-chip batches covering the layer.
    pub cycles: usize,
    pub delay_cycles: u64,
    pub delay_ns: f64,
}

/// Mode and delay in clocks. `n_onchip` is clamped to the layer size, so a
/// layer smaller than the array occupies only the MACs it needs.
pub fn plan_cycles(n_neurons: usize, n_onchip: usize, n_memcover: usize, k: usize) -> PipelinePlan {
    let n_neurons = n_neurons.max(1);
    let n_memcover = n_memcover.max(1);
    let n_onchip = n_onchip.clamp(1, n_neurons);
    let cycles = n_neurons.div_ceil(n_onchip);
    let incycle = n_onchip.div_ceil(n_memcover);
    let k64 = k as u64;
    let (mode, n_parallel, delay) = if n_onchip < n_memcover {
        (PipelineMode::NonPipelined, n_onchip, cycles as u64 * k64)
    } else if incycle < k {
        (PipelineMode::PartiallyPipelined, n_memcover, cycles as u64 * (k64 + 1) + incycle as u64 - 1)
    } else {
        // memory bound: one neuron group enters every 1/n_memcover clocks
        (PipelineMode::FullyPipelined, n_memcover, k64 + n_neurons.div_ceil(n_memcover) as u64)
    };
    PipelinePlan {
        mode,
        n_parallel,
        n_onchip,
        n_memcover,
        incycle_pipe: incycle,
        cycles,
        delay_cycles: delay,
        delay_ns: 0.0,
    }
}

pub fn plan_pipeline(layer: &LayerWorkload, config: &AcceleratorConfig, mem: &MemoryModel) -> PipelinePlan {
    let mc = mem_cover(layer, mem, config.clock_ns);
    let mut p = plan_cycles(layer.n_neurons, config.n_onchip(), mc, config.k);
    p.delay_ns = p.delay_cycles as f64 * config.clock_ns;
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub layers: Vec<(LayerWorkload, PipelinePlan)>,
    pub total_cycles: u64,
    pub total_ns: f64,
}

pub fn network_latency(model: &QuantizedModel, config: &AcceleratorConfig, mem: &MemoryModel) -> Result<LatencyReport> {
    config.validate()?;
    let layers: Vec<_> = workloads(model, mem, config.n_bits)?
        .into_iter()
        .map(|w| {
            let p = plan_pipeline(&w, config, mem);
            (w, p)
        })
        .collect();
    let total_cycles = layers.iter().map(|(_, p)| p.delay_cycles).sum::<u64>();
    Ok(LatencyReport { layers, total_cycles, total_ns: total_cycles as f64 * config.clock_ns })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockCost {
    pub area_um2: f64,
    pub delay_ps: f64,
    pub energy_fj: f64,
}

impl BlockCost {
    fn check(&self, name: &str) -> Result<()> {
        for v in [self.area_um2, self.delay_ps, self.energy_fj] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("block `{name}` has non-positive entry {v}")));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, s: &Scaling) -> Self {
        // switching energy follows power at a fixed activity and delay
        Self {
            area_um2: self.area_um2 * s.area,
            delay_ps: self.delay_ps * s.delay,
            energy_fj: self.energy_fj * s.power * s.delay,
        }
    }
}

/// Block costs of one technology. The `channel` block's delay is the
/// minimum clock period and its energy the switching energy of one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechProfile {
    pub name: String,
    pub voltage_v: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    pub blocks: BTreeMap<String, BlockCost>,
    /// Area outside the channels (memories, buffers, control).
    #[serde(default)]
    pub fixed_area_um2: f64,
    /// Applied once by [`TechProfile::apply_scaling`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
}

const FINFET_JSON: &str = include_str!("../data/profiles/finfet10.json");
const RFET_JSON: &str = include_str!("../data/profiles/rfet10.json");

impl TechProfile {
    pub fn finfet10() -> Self {
        Self::from_json_str(FINFET_JSON).expect("embedded profile")
    }

    pub fn rfet10() -> Self {
        Self::from_json_str(RFET_JSON).expect("embedded profile")
    }

    pub fn defaults() -> Vec<Self> {
        vec![Self::finfet10(), Self::rfet10()]
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.voltage_v.is_nan() || self.voltage_v <= 0.0 || self.fixed_area_um2.is_nan() || self.fixed_area_um2 < 0.0
        {
            return Err(Error::Config(format!("profile `{}` has invalid voltage or fixed area", self.name)));
        }
        for (n, b) in &self.blocks {
            b.check(n)?;
        }
        Ok(())
    }

    pub fn block(&self, name: &str) -> Result<&BlockCost> {
        self.blocks.get(name).ok_or_else(|| Error::MissingProfileEntry(format!("{} has no `{name}` block", self.name)))
    }

    pub fn clock_ns(&self) -> Result<f64> {
        Ok(self.block("channel")?.delay_ps / 1000.0)
    }

    /// Fold pending scaling factors into the block figures.
    pub fn apply_scaling(mut self) -> Self {
        if let Some(s) = self.scaling.take() {
            for b in self.blocks.values_mut() {
                *b = b.scaled(&s);
            }
            self.fixed_area_um2 *= s.area;
        }
        self
    }
}

/// Relative improvement of `candidate` over `reference`, in percent.
pub fn gain_percent(reference: f64, candidate: f64) -> f64 {
    (reference - candidate) / reference * 100.0
}

/// Gains of every common block entry, as `(block, metric, percent)`.
pub fn profile_gains(reference: &TechProfile, candidate: &TechProfile) -> Vec<(String, &'static str, f64)> {
    let mut out = Vec::new();
    for (name, r) in &reference.blocks {
        if let Some(c) = candidate.blocks.get(name) {
            out.push((name.clone(), "area", gain_percent(r.area_um2, c.area_um2)));
            out.push((name.clone(), "delay", gain_percent(r.delay_ps, c.delay_ps)));
            out.push((name.clone(), "energy", gain_percent(r.energy_fj, c.energy_fj)));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaBreakdown {
    pub pcc_um2: f64,
    pub apc_um2: f64,
    pub other_um2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub logic_area_um2: f64,
    pub total_area_um2: f64,
    pub breakdown: AreaBreakdown,
    /// Switching energy of one MAC unit over one clock.
    pub mac_cycle_energy_pj: f64,
    /// Slowest single block on the datapath.
    pub critical_delay_ps: f64,
    pub clock_ns: f64,
}

/// Area, energy and timing of a configuration. `gates` must describe the
/// configured MAC width's APC (`apc{m}`); its adder count relative to the
/// 25-input reference scales the APC cost.
pub fn rollup_cost(config: &AcceleratorConfig, profile: &TechProfile, gates: &[GateCounts]) -> Result<CostReport> {
    let pcc = profile.block("pcc")?;
    let apc = profile.block("apc")?;
    let ch = profile.block("channel")?;
    let want = format!("apc{}", config.multipliers_per_mac);
    let g = gates
        .iter()
        .find(|g| g.block == want)
        .ok_or_else(|| Error::Config(format!("gate counts lack block `{want}`")))?;
    let reference = ApcTree::new(MAC_INPUTS)?;
    let ratio = (g.fa_count + g.ha_count) as f64 / (reference.fa_count() + reference.ha_count()) as f64;

    let c = config.channels as f64;
    let macs = c * config.macs_per_channel as f64;
    let logic = c * ch.area_um2;
    let pcc_area = macs * config.multipliers_per_mac as f64 * 2.0 * pcc.area_um2;
    let apc_area = macs * apc.area_um2 * ratio;
    let other = logic - pcc_area - apc_area;
    if other < 0.0 && config.channels > 0 {
        log::warn!("{}: PCC and APC area exceed the channel area", profile.name);
    }
    Ok(CostReport {
        logic_area_um2: logic,
        total_area_um2: logic + profile.fixed_area_um2,
        breakdown: AreaBreakdown { pcc_um2: pcc_area, apc_um2: apc_area, other_um2: other },
        mac_cycle_energy_pj: ch.energy_fj / 1000.0 / config.macs_per_channel as f64,
        critical_delay_ps: pcc.delay_ps.max(apc.delay_ps),
        clock_ns: ch.delay_ps / 1000.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub adp: f64,
    pub edp: f64,
    pub edap: f64,
}

pub fn metrics(area: f64, energy: f64, delay: f64) -> Result<Metrics> {
    for (n, v) in [("area", area), ("energy", energy), ("delay", delay)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Config(format!("{n} must be positive, got {v}")));
        }
    }
    Ok(Metrics { adp: area * delay, edp: energy * delay, edap: energy * delay * area })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub channels: usize,
    pub profile: String,
    /// Whole-chip area, the area used in the products.
    pub area_um2: f64,
    pub latency_ns: f64,
    pub energy_pj: f64,
    pub adp: f64,
    pub edp: f64,
    pub edap: f64,
    pub logic_area_um2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Argmin {
    pub profile: String,
    pub metric: String,
    pub channels: usize,
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub argmin: Vec<Argmin>,
}

impl SweepReport {
    pub fn row(&self, profile: &str, channels: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.profile == profile && r.channels == channels)
    }

    pub fn argmin_of(&self, profile: &str, metric: &str) -> Option<&Argmin> {
        self.argmin.iter().find(|a| a.profile == profile && a.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Area, latency, energy and products for every channel count and profile. Each profile runs at its own minimum clock period. Energy is the
/// switching energy of all MAC-group cycles and does not depend on the
/// channel count.
pub fn channel_sweep(
    model: &QuantizedModel,
    channels: &[usize],
    profiles: &[TechProfile],
    mem: &MemoryModel,
    n_bits: u32,
    k: usize,
) -> Result<SweepReport> {
    if channels.is_empty() || profiles.is_empty() {
        return Err(Error::Config("sweep needs channel counts and profiles".into()));
    }
    let gates = vec![ApcTree::new(MAC_INPUTS)?.gate_counts()];
    let mut rows = Vec::new();
    for p in profiles {
        for &c in channels {
            let cfg = AcceleratorConfig::new(c, p.clock_ns()?, n_bits, k)?;
            let cost = rollup_cost(&cfg, p, &gates)?;
            let lat = network_latency(model, &cfg, mem)?;
            let mac_cycles: u64 = lat.layers.iter().map(|(w, _)| w.n_neurons as u64 * k as u64).sum();
            let energy = mac_cycles as f64 * cost.mac_cycle_energy_pj;
            let m = metrics(cost.total_area_um2, energy, lat.total_ns)?;
            rows.push(SweepRow {
                channels: c,
                profile: p.name.clone(),
                area_um2: cost.total_area_um2,
                logic_area_um2: cost.logic_area_um2,
                latency_ns: lat.total_ns,
                energy_pj: energy,
                adp: m.adp,
                edp: m.edp,
                edap: m.edap,
            });
        }
    }
    let mut argmin = Vec::new();
    let (lo, hi) = (channels.iter().min().copied(), channels.iter().max().copied());
    for p in profiles {
        for (metric, f) in
            [("adp", (|r: &SweepRow| r.adp) as fn(&SweepRow) -> f64), ("edp", |r| r.edp), ("edap", |r| r.edap)]
        {
            let best = rows
                .iter()
                .filter(|r| r.profile == p.name)
                .min_by(|a, b| f(a).total_cmp(&f(b)).then(a.channels.cmp(&b.channels)))
                .expect("rows exist");
            argmin.push(Argmin {
                profile: p.name.clone(),
                metric: metric.to_string(),
                channels: best.channels,
                interior: Some(best.channels) != lo && Some(best.channels) != hi,
            });
        }
    }
    Ok(SweepReport { rows, argmin })
}
