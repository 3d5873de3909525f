//! Quantized CNNs evaluated either in fixed point or bit-level SC.
//!
//! A model is a list of layers. Every convolution or fully-connected layer
//! opens a *stage*; ReLU and max-pool layers that follow belong to it. Each
//! output neuron of a stage has its taps (plus an optional bias tap against a
//! constant +1 activation) split into `G = ceil(taps / 25)` MAC groups, and
//! its pre-activation is
//!
//! ```text
//! y = sum(a_i * w_i) / (25 G)
//! ```
//!
//! which is exactly what the SC datapath's APC counts encode. At a stage
//! boundary `y` is scaled by `2^output_shift`, saturated to the bipolar range
//! and re-quantized to `n_bits`. The last stage's values are the class scores.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstream::{Bitstream, Encoding};
use crate::error::{Error, Result};
use crate::neuron::{
    accumulate_mac_counts, b2s_counts, b2s_range, bipolar_word, max_pool, relu, B2sMode, CorrelationGroup, MacScratch,
    MAC_INPUTS,
};
use crate::pcc::{PccKind, PccSpec};
use crate::rns::{
    bits_for_range, mix_seed, IdealSource, Lfsr, PolynomialTable, RandomSource, MAX_LFSR_WIDTH, MIN_LFSR_WIDTH,
};

pub const MIN_BITS: u32 = 3;
pub const MAX_BITS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Conv { out_channels: usize, kernel_h: usize, kernel_w: usize, stride: usize },
    FullyConnected { out_features: usize },
    MaxPool { window: usize },
    ReLU,
}

impl LayerSpec {
    pub fn is_weighted(&self) -> bool {
        matches!(self, LayerSpec::Conv { .. } | LayerSpec::FullyConnected { .. })
    }

    /// Output shape, or an error when the layer does not fit its input.
    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        let s = match *self {
            LayerSpec::Conv { out_channels, kernel_h, kernel_w, stride } => {
                if stride == 0 || kernel_h == 0 || kernel_w == 0 || out_channels == 0 {
                    return Err(Error::Shape("conv dimensions must be positive".into()));
                }
                if kernel_h > input.height || kernel_w > input.width {
                    return Err(Error::Shape(format!(
                        "{kernel_h}x{kernel_w} kernel does not fit {}x{} input",
                        input.height, input.width
                    )));
                }
                Shape {
                    channels: out_channels,
                    height: (input.height - kernel_h) / stride + 1,
                    width: (input.width - kernel_w) / stride + 1,
                }
            }
            LayerSpec::FullyConnected { out_features } => {
                if out_features == 0 {
                    return Err(Error::Shape("fully-connected layer needs outputs".into()));
                }
                Shape { channels: out_features, height: 1, width: 1 }
            }
            LayerSpec::MaxPool { window } => {
                if window == 0 || window > input.height || window > input.width {
                    return Err(Error::Shape(format!("pool window {window} does not fit input")));
                }
                Shape { channels: input.channels, height: input.height / window, width: input.width / window }
            }
            LayerSpec::ReLU => input,
        };
        Ok(s)
    }

    /// Taps per output neuron, excluding bias.
    pub fn fan_in(&self, input: Shape) -> usize {
        match *self {
            LayerSpec::Conv { kernel_h, kernel_w, .. } => input.channels * kernel_h * kernel_w,
            LayerSpec::FullyConnected { .. } => input.len(),
            _ => 0,
        }
    }

    fn weight_count(&self, input: Shape) -> usize {
        match *self {
            LayerSpec::Conv { out_channels, .. } => out_channels * self.fan_in(input),
            LayerSpec::FullyConnected { out_features } => out_features * self.fan_in(input),
            _ => 0,
        }
    }
}

/// Weights of a conv (`[out][in][kh][kw]`) or fully-connected (`[out][in]`)
/// layer as real values on the model's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub weights: Vec<f64>,
    pub bias: Option<Vec<f64>>,
    /// Power-of-two gain applied at the stage boundary.
    pub output_shift: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    pub params: Option<Params>,
}

/// A CNN whose weights all lie on the `n_bits` signed grid `q / 2^(n-1)`.
/// Models loaded for architecture studies may omit weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedModel {
    pub name: String,
    pub n_bits: u32,
    pub input: Shape,
    pub layers: Vec<Layer>,
}

/// Round to the nearest point of the `n_bits` grid over `[-1, 1)`, ties
/// away from zero, saturating at the ends.
pub fn quantize_value(v: f64, n_bits: u32) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFinite("weight"));
    }
    let scale = f64::from(1u32 << (n_bits - 1));
    let q = (v * scale).round().clamp(-scale, scale - 1.0);
    Ok(q / scale)
}

pub fn quantize_weights(weights: &[f64], n_bits: u32) -> Result<Vec<f64>> {
    check_bits(n_bits)?;
    weights.iter().map(|&w| quantize_value(w, n_bits)).collect()
}

fn check_bits(n_bits: u32) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&n_bits) {
        return Err(Error::WidthOutOfRange(n_bits, MIN_BITS, MAX_BITS));
    }
    Ok(())
}

/// Quantize real-valued layers into a model.
pub fn quantize(name: &str, input: Shape, layers: &[Layer], n_bits: u32) -> Result<QuantizedModel> {
    check_bits(n_bits)?;
    let layers = layers
        .iter()
        .map(|l| {
            let params = match &l.params {
                None => None,
                Some(p) => Some(Params {
                    weights: quantize_weights(&p.weights, n_bits)?,
                    bias: p.bias.as_deref().map(|b| quantize_weights(b, n_bits)).transpose()?,
                    output_shift: p.output_shift,
                }),
            };
            Ok(Layer { spec: l.spec, params })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = QuantizedModel { name: name.to_string(), n_bits, input, layers };
    m.validate()?;
    Ok(m)
}

/// One weighted layer with the ReLU / pooling layers that follow it.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub layer: usize,
    pub input: Shape,
    pub pre_shape: Shape,
    pub post: Vec<LayerSpec>,
    pub output: Shape,
    pub groups: usize,
}

impl Stage {
    /// Largest per-cycle count of one output neuron.
    pub fn max_count(&self) -> u64 {
        (MAC_INPUTS * self.groups) as u64
    }

    pub fn neurons(&self) -> usize {
        self.pre_shape.len()
    }
}

impl QuantizedModel {
    pub fn validate(&self) -> Result<()> {
        check_bits(self.n_bits)?;
        if self.input.is_empty() {
            return Err(Error::Shape("empty input".into()));
        }
        if self.layers.is_empty() || !self.layers[0].spec.is_weighted() {
            return Err(Error::Model("the first layer must be convolutional or fully connected".into()));
        }
        let mut shape = self.input;
        for (i, l) in self.layers.iter().enumerate() {
            if let Some(p) = &l.params {
                if !l.spec.is_weighted() {
                    return Err(Error::Model(format!("layer {i} takes no weights")));
                }
                let want = l.spec.weight_count(shape);
                if p.weights.len() != want {
                    return Err(Error::Shape(format!("layer {i}: {} weights, expected {want}", p.weights.len())));
                }
                let outs = l.spec.output_shape(shape)?.channels;
                if let Some(b) = &p.bias {
                    if b.len() != outs {
                        return Err(Error::Shape(format!("layer {i}: {} biases, expected {outs}", b.len())));
                    }
                }
                for &w in p.weights.iter().chain(p.bias.iter().flatten()) {
                    if quantize_value(w, self.n_bits)? != w {
                        return Err(Error::Model(format!(
                            "layer {i}: weight {w} is not on the {}-bit grid",
                            self.n_bits
                        )));
                    }
                }
            }
            shape = l.spec.output_shape(shape)?;
        }
        Ok(())
    }

    pub fn output_shape(&self) -> Result<Shape> {
        self.layers.iter().try_fold(self.input, |s, l| l.spec.output_shape(s))
    }

    pub fn stages(&self) -> Result<Vec<Stage>> {
        let mut stages: Vec<Stage> = Vec::new();
        let mut shape = self.input;
        for (i, l) in self.layers.iter().enumerate() {
            let out = l.spec.output_shape(shape)?;
            if l.spec.is_weighted() {
                let bias = l.params.as_ref().is_some_and(|p| p.bias.is_some());
                let taps = l.spec.fan_in(shape) + usize::from(bias);
                stages.push(Stage {
                    layer: i,
                    input: shape,
                    pre_shape: out,
                    post: Vec::new(),
                    output: out,
                    groups: taps.div_ceil(MAC_INPUTS),
                });
            } else {
                let st = stages.last_mut().ok_or_else(|| Error::Model("model starts with an activation".into()))?;
                st.post.push(l.spec);
                st.output = out;
            }
            shape = out;
        }
        Ok(stages)
    }

    /// The same model on a coarser or finer grid.
    pub fn requantize(&self, n_bits: u32) -> Result<QuantizedModel> {
        quantize(&self.name, self.input, &self.layers, n_bits)
    }

    fn params(&self, stage: &Stage) -> Result<&Params> {
        self.layers[stage.layer]
            .params
            .as_ref()
            .ok_or_else(|| Error::Model(format!("layer {} has no weights", stage.layer)))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(s)?;
        f.into_model()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelFile::from_model(self))?)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    #[serde(default)]
    name: String,
    n_bits: u32,
    input: Shape,
    layers: Vec<LayerFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum LayerFile {
    Conv {
        out_channels: usize,
        kernel: [usize; 2],
        #[serde(default = "one")]
        stride: usize,
        #[serde(flatten)]
        params: Option<ParamsFile>,
    },
    Fc {
        out_features: usize,
        #[serde(flatten)]
        params: Option<ParamsFile>,
    },
    Maxpool {
        window: usize,
    },
    Relu,
}

fn one() -> usize {
    1
}

/// Integers `q` with value `q * 2^exp`.
#[derive(Debug, Serialize, Deserialize)]
struct ParamsFile {
    weights: Vec<i64>,
    weight_exp: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bias_exp: Option<i32>,
    #[serde(default)]
    output_shift: i32,
}

impl ParamsFile {
    fn decode(&self) -> Params {
        let scale = |e: i32| 2f64.powi(e);
        let ws = scale(self.weight_exp);
        let bs = scale(self.bias_exp.unwrap_or(self.weight_exp));
        Params {
            weights: self.weights.iter().map(|&q| q as f64 * ws).collect(),
            bias: self.bias.as_ref().map(|b| b.iter().map(|&q| q as f64 * bs).collect()),
            output_shift: self.output_shift,
        }
    }

    fn encode(p: &Params, n_bits: u32) -> Self {
        let exp = 1 - n_bits as i32;
        let s = 2f64.powi(-exp);
        ParamsFile {
            weights: p.weights.iter().map(|&w| (w * s).round() as i64).collect(),
            weight_exp: exp,
            bias: p.bias.as_ref().map(|b| b.iter().map(|&w| (w * s).round() as i64).collect()),
            bias_exp: p.bias.as_ref().map(|_| exp),
            output_shift: p.output_shift,
        }
    }
}

impl ModelFile {
    fn into_model(self) -> Result<QuantizedModel> {
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                LayerFile::Conv { out_channels, kernel, stride, params } => Layer {
                    spec: LayerSpec::Conv {
                        out_channels: *out_channels,
                        kernel_h: kernel[0],
                        kernel_w: kernel[1],
                        stride: *stride,
                    },
                    params: params.as_ref().map(ParamsFile::decode),
                },
                LayerFile::Fc { out_features, params } => Layer {
                    spec: LayerSpec::FullyConnected { out_features: *out_features },
                    params: params.as_ref().map(ParamsFile::decode),
                },
                LayerFile::Maxpool { window } => Layer { spec: LayerSpec::MaxPool { window: *window }, params: None },
                LayerFile::Relu => Layer { spec: LayerSpec::ReLU, params: None },
            })
            .collect();
        let m = QuantizedModel { name: self.name, n_bits: self.n_bits, input: self.input, layers };
        m.validate()?;
        Ok(m)
    }

    fn from_model(m: &QuantizedModel) -> Self {
        let layers = m
            .layers
            .iter()
            .map(|l| {
                let params = l.params.as_ref().map(|p| ParamsFile::encode(p, m.n_bits));
                match l.spec {
                    LayerSpec::Conv { out_channels, kernel_h, kernel_w, stride } => {
                        LayerFile::Conv { out_channels, kernel: [kernel_h, kernel_w], stride, params }
                    }
                    LayerSpec::FullyConnected { out_features } => LayerFile::Fc { out_features, params },
                    LayerSpec::MaxPool { window } => LayerFile::Maxpool { window },
                    LayerSpec::ReLU => LayerFile::Relu,
                }
            })
            .collect();
        ModelFile { name: m.name.clone(), n_bits: m.n_bits, input: m.input, layers }
    }
}

/// Image with pixel intensities in `[0, 1]`, laid out `[c][h][w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub shape: Shape,
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(shape: Shape, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != shape.len() {
            return Err(Error::Shape(format!("{} pixels for shape {:?}", pixels.len(), shape)));
        }
        Ok(Self { shape, pixels })
    }

    pub fn from_bytes(shape: Shape, bytes: &[u8]) -> Result<Self> {
        Self::new(shape, bytes.iter().map(|&b| f64::from(b) / 255.0).collect())
    }
}

impl Params {
    /// Weight `i`, where indices past the weights address the biases.
    fn value(&self, i: usize) -> f64 {
        let n = self.weights.len();
        if i < n {
            self.weights[i]
        } else {
            self.bias.as_ref().expect("bias present")[i - n]
        }
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().chain(self.bias.iter().flatten()).copied()
    }
}

/// Taps of output neuron `o`: input index (`None` for the bias slot) and
/// parameter index (see [`Params::value`]).
fn neuron_taps(
    spec: &LayerSpec,
    input: Shape,
    pre: Shape,
    params: &Params,
    o: usize,
    taps: &mut Vec<(Option<usize>, usize)>,
) {
    taps.clear();
    match *spec {
        LayerSpec::Conv { kernel_h, kernel_w, stride, .. } => {
            let oc = o / (pre.height * pre.width);
            let y = (o / pre.width) % pre.height;
            let x = o % pre.width;
            let per_out = input.channels * kernel_h * kernel_w;
            for ic in 0..input.channels {
                for ky in 0..kernel_h {
                    for kx in 0..kernel_w {
                        let idx = (ic * input.height + y * stride + ky) * input.width + x * stride + kx;
                        taps.push((Some(idx), oc * per_out + (ic * kernel_h + ky) * kernel_w + kx));
                    }
                }
            }
            if params.bias.is_some() {
                taps.push((None, params.weights.len() + oc));
            }
        }
        LayerSpec::FullyConnected { .. } => {
            let n = input.len();
            taps.extend((0..n).map(|i| (Some(i), o * n + i)));
            if params.bias.is_some() {
                taps.push((None, params.weights.len() + o));
            }
        }
        _ => unreachable!("only weighted layers have taps"),
    }
}

fn pool_indices(shape: Shape, window: usize, o: usize) -> impl Iterator<Item = usize> {
    let (oh, ow) = (shape.height / window, shape.width / window);
    let c = o / (oh * ow);
    let y = (o / ow) % oh;
    let x = o % ow;
    (0..window * window).map(move |t| {
        let (dy, dx) = (t / window, t % window);
        (c * shape.height + y * window + dy) * shape.width + x * window + dx
    })
}

fn boundary(values: &mut [f64], shift: i32, n_bits: u32, last: bool) -> Result<()> {
    let g = 2f64.powi(shift);
    for v in values.iter_mut() {
        *v *= g;
        if !last {
            *v = quantize_value(*v, n_bits)?;
        }
    }
    Ok(())
}

fn input_activations(model: &QuantizedModel, image: &Image) -> Result<Vec<f64>> {
    if image.shape != model.input {
        return Err(Error::Shape(format!("image {:?} does not match model input {:?}", image.shape, model.input)));
    }
    image.pixels.iter().map(|&p| quantize_value(2.0 * p - 1.0, model.n_bits)).collect()
}

/// Deterministic fixed-point forward pass.
pub fn fixed_point_infer(model: &QuantizedModel, image: &Image) -> Result<Vec<f64>> {
    Ok(fixed_point_trace(model, image)?.pop().expect("at least one stage"))
}

/// Activations after every stage boundary; the last entry is the scores.
pub fn fixed_point_trace(model: &QuantizedModel, image: &Image) -> Result<Vec<Vec<f64>>> {
    let mut trace = Vec::new();
    let mut acts = input_activations(model, image)?;
    let stages = model.stages()?;
    let mut taps = Vec::new();
    for (si, st) in stages.iter().enumerate() {
        let params = model.params(st)?;
        let spec = &model.layers[st.layer].spec;
        let m = st.max_count() as f64;
        let mut vals: Vec<f64> = (0..st.neurons())
            .map(|o| {
                neuron_taps(spec, st.input, st.pre_shape, params, o, &mut taps);
                taps.iter().map(|&(i, p)| i.map_or(1.0, |i| acts[i]) * params.value(p)).sum::<f64>() / m
            })
            .collect();
        let mut shape = st.pre_shape;
        for post in &st.post {
            match *post {
                LayerSpec::ReLU => vals.iter_mut().for_each(|v| *v = v.max(0.0)),
                LayerSpec::MaxPool { window } => {
                    let out = post.output_shape(shape)?;
                    vals = (0..out.len())
                        .map(|o| pool_indices(shape, window, o).map(|i| vals[i]).fold(f64::NEG_INFINITY, f64::max))
                        .collect();
                    shape = out;
                }
                _ => unreachable!(),
            }
        }
        boundary(&mut vals, params.output_shift, model.n_bits, si + 1 == stages.len())?;
        trace.push(vals.clone());
        acts = vals;
    }
    Ok(trace)
}

/// Where the random words come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceMode {
    #[default]
    Ideal,
    Lfsr,
}

/// How the final stage's result is read out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    /// Sum the per-cycle counts over all cycles (the S2B counter sits
    /// directly on the adder-tree output).
    #[default]
    Count,
    /// Re-encode through B2S and count the resulting stream.
    Restochastic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScConfig {
    pub k: usize,
    pub pcc: PccKind,
    pub source: SourceMode,
    pub b2s_mode: B2sMode,
    pub readout: Readout,
    /// Polynomials replacing the built-in ones in LFSR mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lfsr_taps: Option<PolynomialTable>,
}

impl ScConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            pcc: PccKind::Comparator,
            source: SourceMode::Ideal,
            b2s_mode: B2sMode::PerCycle,
            readout: Readout::Count,
            lfsr_taps: None,
        }
    }
}

fn make_source(cfg: &ScConfig, seed: u64, stream: u64, bits: u32) -> Result<Box<dyn RandomSource>> {
    match cfg.source {
        SourceMode::Ideal => Ok(Box::new(IdealSource::derive(seed, stream, bits.clamp(1, 32))?)),
        SourceMode::Lfsr => {
            let w = bits.max(MIN_LFSR_WIDTH);
            if w > MAX_LFSR_WIDTH {
                return Err(Error::SourceTooNarrow { have: MAX_LFSR_WIDTH, need: w });
            }
            let full = (1u64 << w) - 1;
            let s = (mix_seed(seed, stream) % full + 1) as u32;
            match &cfg.lfsr_taps {
                Some(t) => Ok(Box::new(Lfsr::from_table(t, w, s)?)),
                None => Ok(Box::new(Lfsr::maximal(w, s)?)),
            }
        }
    }
}

/// Streams for each distinct input word, generated lazily from one group.
struct StreamCache<'a> {
    group: &'a CorrelationGroup,
    spec: PccSpec,
    words: Vec<Option<Vec<u64>>>,
}

impl<'a> StreamCache<'a> {
    fn new(group: &'a CorrelationGroup, spec: PccSpec) -> Self {
        Self { group, spec, words: vec![None; spec.max_word() as usize + 1] }
    }

    fn index(&mut self, v: f64) -> Result<u32> {
        let x = bipolar_word(&self.spec, v);
        if self.words[x as usize].is_none() {
            let s = self.group.stream(&self.spec, x, Encoding::Bipolar)?;
            self.words[x as usize] = Some(s.words().to_vec());
        }
        Ok(x)
    }

    fn get(&self, x: u32) -> &[u64] {
        self.words[x as usize].as_deref().expect("stream generated")
    }
}

/// Bit-level SC forward pass. Every stage draws three word sequences from
/// sources derived from `seed`: one shared by all activation SNGs, one by
/// all weight SNGs, and one by the B2S converters (which makes all neuron
/// outputs of the stage one correlation group, so ReLU and pooling are
/// exact ORs).
pub fn sc_infer(model: &QuantizedModel, image: &Image, cfg: &ScConfig, seed: u64) -> Result<Vec<f64>> {
    Ok(sc_trace(model, image, cfg, seed)?.pop().expect("at least one stage"))
}

/// Decoded activations after every stage boundary of [`sc_infer`].
pub fn sc_trace(model: &QuantizedModel, image: &Image, cfg: &ScConfig, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut trace = Vec::new();
    if cfg.k == 0 {
        return Err(Error::EmptyStream);
    }
    let k = cfg.k;
    let n = model.n_bits;
    let spec = PccSpec::new(cfg.pcc, n)?;
    let mut acts = input_activations(model, image)?;
    let stages = model.stages()?;
    let ones = Bitstream::ones(k, Encoding::Bipolar)?.words().to_vec();
    let mut taps = Vec::new();
    let mut scratch = MacScratch::default();
    let mut totals = vec![0u32; k];

    for (si, st) in stages.iter().enumerate() {
        let last = si + 1 == stages.len();
        let params = model.params(st)?;
        let layer = &model.layers[st.layer].spec;
        let base = 3 * si as u64;
        let ga = CorrelationGroup::draw(base, &mut make_source(cfg, seed, base, n)?, k);
        let gw = CorrelationGroup::draw(base + 1, &mut make_source(cfg, seed, base + 1, n)?, k);
        let mut ca = StreamCache::new(&ga, spec);
        let mut cw = StreamCache::new(&gw, spec);
        let zero_a = ca.index(0.0)?;
        let zero_w = cw.index(0.0)?;

        let m = st.max_count();
        let count_readout = last && st.post.is_empty() && cfg.readout == Readout::Count;
        let gb = if count_readout {
            None
        } else {
            let range = b2s_range(cfg.b2s_mode, m, k);
            let mut src = make_source(cfg, seed, base + 2, bits_for_range(range))?;
            Some(CorrelationGroup::draw_below(base + 2, &mut src, k, range)?)
        };

        let act_ix = acts.iter().map(|&a| ca.index(a)).collect::<Result<Vec<_>>>()?;
        let w_ix = params.values().map(|w| cw.index(w)).collect::<Result<Vec<_>>>()?;
        let (ca, cw) = (ca, cw);
        let mut vals = Vec::with_capacity(st.neurons());
        let mut streams = Vec::new();
        let mut a_refs: Vec<&[u64]> = Vec::with_capacity(st.groups * MAC_INPUTS);
        let mut w_refs: Vec<&[u64]> = Vec::with_capacity(st.groups * MAC_INPUTS);
        for o in 0..st.neurons() {
            neuron_taps(layer, st.input, st.pre_shape, params, o, &mut taps);
            a_refs.clear();
            w_refs.clear();
            for &(i, p) in &taps {
                a_refs.push(i.map_or(&ones[..], |i| ca.get(act_ix[i])));
                w_refs.push(cw.get(w_ix[p]));
            }
            a_refs.resize(st.groups * MAC_INPUTS, ca.get(zero_a));
            w_refs.resize(st.groups * MAC_INPUTS, cw.get(zero_w));
            totals.fill(0);
            // summing group counts into one total is the adder tree
            for (a, w) in a_refs.chunks(MAC_INPUTS).zip(w_refs.chunks(MAC_INPUTS)) {
                accumulate_mac_counts(a, w, k, &mut totals, &mut scratch)?;
            }
            match &gb {
                None => {
                    let sum: u64 = totals.iter().map(|&t| u64::from(t)).sum();
                    vals.push((2.0 * sum as f64 / k as f64 - m as f64) / m as f64);
                }
                Some(g) => streams.push(b2s_counts(&totals, m, cfg.b2s_mode, g)?),
            }
        }

        if let Some(g) = &gb {
            let zero = g.zero_stream()?;
            let mut shape = st.pre_shape;
            for post in &st.post {
                match *post {
                    LayerSpec::ReLU => {
                        streams = streams.iter().map(|s| relu(s, &zero)).collect::<Result<_>>()?;
                    }
                    LayerSpec::MaxPool { window } => {
                        let out = post.output_shape(shape)?;
                        streams = (0..out.len())
                            .map(|o| {
                                let members: Vec<&Bitstream> =
                                    pool_indices(shape, window, o).map(|i| &streams[i]).collect();
                                max_pool(&members)
                            })
                            .collect::<Result<_>>()?;
                        shape = out;
                    }
                    _ => unreachable!(),
                }
            }
            vals = streams.iter().map(|s| s.decode()).collect();
        }
        boundary(&mut vals, params.output_shift, n, last)?;
        trace.push(vals.clone());
        acts = vals;
    }
    Ok(trace)
}

pub fn argmax(scores: &[f64]) -> usize {
    scores.iter().enumerate().fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) }).0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Vec<Image>,
    pub labels: Vec<u8>,
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// The first `n` samples.
    pub fn take(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset { images: self.images[..n].to_vec(), labels: self.labels[..n].to_vec() }
    }

    /// IDX3 unsigned-byte images and IDX1 labels.
    pub fn from_idx_bytes(images: &[u8], labels: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Dataset(m.to_string());
        if images.len() < 16 || be_u32(images) != 0x0803 {
            return Err(bad("image file is not an IDX3 unsigned-byte container"));
        }
        if labels.len() < 8 || be_u32(labels) != 0x0801 {
            return Err(bad("label file is not an IDX1 unsigned-byte container"));
        }
        let n = be_u32(&images[4..]) as usize;
        let h = be_u32(&images[8..]) as usize;
        let w = be_u32(&images[12..]) as usize;
        if be_u32(&labels[4..]) as usize != n {
            return Err(bad("image and label counts differ"));
        }
        if images.len() != 16 + n * h * w || labels.len() != 8 + n {
            return Err(bad("truncated IDX file"));
        }
        let shape = Shape { channels: 1, height: h, width: w };
        let imgs = images[16..].chunks(h * w).map(|c| Image::from_bytes(shape, c)).collect::<Result<Vec<_>>>()?;
        Ok(Dataset { images: imgs, labels: labels[8..].to_vec() })
    }

    pub fn from_idx(images: &Path, labels: &Path) -> Result<Self> {
        Self::from_idx_bytes(&std::fs::read(images)?, &std::fs::read(labels)?)
    }

    /// Rows of `label,p0,p1,...` with byte intensities; a header row is
    /// skipped if its first cell is not a number. Images are square.
    pub fn from_csv_reader<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(std::io::BufReader::new(r));
        let mut images = Vec::new();
        let mut labels = Vec::new();
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            let Ok(label) = rec[0].trim().parse::<u8>() else {
                if row == 0 {
                    continue;
                }
                return Err(Error::Dataset(format!("row {row}: bad label `{}`", &rec[0])));
            };
            let px = rec
                .iter()
                .skip(1)
                .map(|s| s.trim().parse::<u8>().map_err(|_| Error::Dataset(format!("row {row}: bad pixel `{s}`"))))
                .collect::<Result<Vec<u8>>>()?;
            let side = (px.len() as f64).sqrt() as usize;
            if side * side != px.len() {
                return Err(Error::Dataset(format!("row {row}: {} pixels is not a square image", px.len())));
            }
            images.push(Image::from_bytes(Shape { channels: 1, height: side, width: side }, &px)?);
            labels.push(label);
        }
        Ok(Dataset { images, labels })
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    /// A `.csv` file, or an IDX image file whose label file sits beside it
    /// with `images` replaced by `labels` in the name.
    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            return Self::from_csv(path);
        }
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
        if !name.contains("images") {
            return Err(Error::Dataset(format!("cannot find labels for `{}`", path.display())));
        }
        let labels = path.with_file_name(name.replace("images", "labels").replace("idx3", "idx1"));
        Self::from_idx(path, &labels)
    }

    pub fn write_idx<W: Write>(&self, images: &mut W, labels: &mut W) -> Result<()> {
        let s = self.images.first().map(|i| i.shape).ok_or_else(|| Error::Dataset("empty dataset".into()))?;
        images.write_all(&0x0803u32.to_be_bytes())?;
        for v in [self.len(), s.height, s.width] {
            images.write_all(&(v as u32).to_be_bytes())?;
        }
        for im in &self.images {
            let b: Vec<u8> = im.pixels.iter().map(|&p| (p * 255.0).round().clamp(0.0, 255.0) as u8).collect();
            images.write_all(&b)?;
        }
        labels.write_all(&0x0801u32.to_be_bytes())?;
        labels.write_all(&(self.len() as u32).to_be_bytes())?;
        labels.write_all(&self.labels)?;
        Ok(())
    }
}

/// Accuracy of one configuration. `k` is `None` for the fixed-point baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub k: Option<usize>,
    pub n_bits: u32,
    pub accuracy: f64,
    pub n_images: usize,
    pub seed: u64,
    /// `(correct, total)` per class label.
    pub per_class: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportRow {
    k: Option<usize>,
    n_bits: u32,
    accuracy: f64,
    n_images: usize,
    seed: u64,
}

fn tally(labels: &[u8], preds: &[usize]) -> (f64, Vec<(usize, usize)>) {
    let classes = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut per = vec![(0, 0); classes];
    for (&l, &p) in labels.iter().zip(preds) {
        per[l as usize].1 += 1;
        if p == l as usize {
            per[l as usize].0 += 1;
        }
    }
    let correct: usize = per.iter().map(|c| c.0).sum();
    (correct as f64 / labels.len() as f64, per)
}

pub fn fixed_point_accuracy(model: &QuantizedModel, data: &Dataset) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::Dataset("empty dataset".into()));
    }
    let preds = data
        .images
        .par_iter()
        .map(|im| fixed_point_infer(model, im).map(|s| argmax(&s)))
        .collect::<Result<Vec<_>>>()?;
    let (accuracy, per_class) = tally(&data.labels, &preds);
    Ok(EvalReport { k: None, n_bits: model.n_bits, accuracy, n_images: data.len(), seed: 0, per_class })
}

/// Seed used for image `index` of a run seeded with `seed`.
pub fn image_seed(seed: u64, index: usize) -> u64 {
    mix_seed(seed, index as u64)
}

pub fn sc_accuracy(model: &QuantizedModel, data: &Dataset, cfg: &ScConfig, seed: u64) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::Dataset("empty dataset".into()));
    }
    let preds = data
        .images
        .par_iter()
        .enumerate()
        .map(|(i, im)| sc_infer(model, im, cfg, image_seed(seed, i)).map(|s| argmax(&s)))
        .collect::<Result<Vec<_>>>()?;
    let (accuracy, per_class) = tally(&data.labels, &preds);
    Ok(EvalReport { k: Some(cfg.k), n_bits: model.n_bits, accuracy, n_images: data.len(), seed, per_class })
}

/// One report per `(n_bits, k)` pair, `n_bits` outermost. The model is
/// re-quantized for each precision.
pub fn accuracy_sweep(
    model: &QuantizedModel,
    data: &Dataset,
    k_values: &[usize],
    n_bits_values: &[u32],
    seed: u64,
    base: &ScConfig,
) -> Result<Vec<EvalReport>> {
    if data.is_empty() {
        return Err(Error::Dataset("empty dataset".into()));
    }
    let mut out = Vec::new();
    for &n in n_bits_values {
        let m = if n == model.n_bits { model.clone() } else { model.requantize(n)? };
        for &k in k_values {
            out.push(sc_accuracy(&m, data, &ScConfig { k, ..base.clone() }, seed)?);
        }
    }
    Ok(out)
}

pub fn write_reports<W: Write>(reports: &[EvalReport], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in reports {
        wr.serialize(ReportRow { k: r.k, n_bits: r.n_bits, accuracy: r.accuracy, n_images: r.n_images, seed: r.seed })?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_reports<R: BufRead>(r: R) -> Result<Vec<EvalReport>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rd.deserialize::<ReportRow>()
        .map(|row| {
            let row = row?;
            Ok(EvalReport {
                k: row.k,
                n_bits: row.n_bits,
                accuracy: row.accuracy,
                n_images: row.n_images,
                seed: row.seed,
                per_class: Vec::new(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(h: usize, w: usize, px: Vec<f64>) -> Image {
        Image::new(Shape { channels: 1, height: h, width: w }, px).unwrap()
    }

    fn conv1x1(weight: f64) -> QuantizedModel {
        quantize(
            "id",
            Shape { channels: 1, height: 3, width: 3 },
            &[Layer {
                spec: LayerSpec::Conv { out_channels: 1, kernel_h: 1, kernel_w: 1, stride: 1 },
                params: Some(Params { weights: vec![weight], bias: None, output_shift: 0 }),
            }],
            8,
        )
        .unwrap()
    }

    #[test]
    fn quantize_examples() {
        for n in 3..=10 {
            assert_eq!(quantize_value(0.0, n).unwrap(), 0.0);
        }
        assert_eq!(quantize_value(0.4, 8).unwrap(), 51.0 / 128.0);
        assert_eq!(quantize_value(1.0, 8).unwrap(), 127.0 / 128.0);
        assert_eq!(quantize_value(-3.0, 8).unwrap(), -1.0);
        // ties away from zero
        assert_eq!(quantize_value(0.5 / 128.0, 8).unwrap(), 1.0 / 128.0);
        assert_eq!(quantize_value(-0.5 / 128.0, 8).unwrap(), -1.0 / 128.0);
        assert!(quantize_value(f64::NAN, 8).is_err());
        let w = [0.3, -0.71, 0.999, -1.2, 0.0049];
        let q = quantize_weights(&w, 5).unwrap();
        assert_eq!(quantize_weights(&q, 5).unwrap(), q);
    }

    #[test]
    fn identity_conv() {
        // 1x1 conv: y = a w / 25 per pixel; shift by log2(25)-ish is not
        // exact, so compare the raw pre-activation
        let m = conv1x1(127.0 / 128.0);
        let px: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let s = fixed_point_infer(&m, &img(3, 3, px.clone())).unwrap();
        for (i, v) in s.iter().enumerate() {
            let a = quantize_value(2.0 * px[i] - 1.0, 8).unwrap();
            assert_eq!(*v, a * (127.0 / 128.0) / 25.0);
        }
    }

    fn toy() -> QuantizedModel {
        // 4x4 input, 2x2 conv (2 channels, stride 2), relu, fc 2 with bias
        let conv =
            Params { weights: vec![0.5, -0.25, 0.75, 0.125, -0.5, 0.5, 0.25, -0.75], bias: None, output_shift: 3 };
        let fc = Params {
            weights: vec![
                0.5, -0.5, 0.25, 0.25, -0.125, 0.375, 0.625, -0.25, 0.0, 0.5, -0.75, 0.25, 0.125, 0.0, 0.5, -0.5,
            ],
            bias: Some(vec![0.25, -0.25]),
            output_shift: 0,
        };
        quantize(
            "toy",
            Shape { channels: 1, height: 4, width: 4 },
            &[
                Layer {
                    spec: LayerSpec::Conv { out_channels: 2, kernel_h: 2, kernel_w: 2, stride: 2 },
                    params: Some(conv),
                },
                Layer { spec: LayerSpec::ReLU, params: None },
                Layer { spec: LayerSpec::FullyConnected { out_features: 2 }, params: Some(fc) },
            ],
            8,
        )
        .unwrap()
    }

    fn toy_image() -> Image {
        let px = [0.0, 1.0, 0.5, 0.25, 0.75, 0.5, 1.0, 0.0, 0.125, 0.875, 0.5, 0.5, 1.0, 1.0, 0.0, 0.375];
        img(4, 4, px.to_vec())
    }

    #[test]
    fn toy_trace_by_hand() {
        let m = toy();
        let im = toy_image();
        let a: Vec<f64> = im.pixels.iter().map(|&p| quantize_value(2.0 * p - 1.0, 8).unwrap()).collect();
        // a = [-1, 127/128, 0, -0.5, 0.5, 0, 127/128, -1, -0.75, 0.75, 0, 0, 127/128, 127/128, -1, -0.25]
        let k0 = [0.5, -0.25, 0.75, 0.125];
        let k1 = [-0.5, 0.5, 0.25, -0.75];
        let win =
            |y: usize, x: usize| [a[y * 8 + x * 2], a[y * 8 + x * 2 + 1], a[y * 8 + x * 2 + 4], a[y * 8 + x * 2 + 5]];
        let mut hidden = Vec::new();
        for k in [k0, k1] {
            for y in 0..2 {
                for x in 0..2 {
                    let w = win(y, x);
                    let y0: f64 = w.iter().zip(&k).map(|(p, q)| p * q).sum::<f64>() / 25.0;
                    hidden.push(quantize_value(y0.max(0.0) * 8.0, 8).unwrap());
                }
            }
        }
        let fcw = &m.layers[2].params.as_ref().unwrap().weights;
        let want: Vec<f64> = (0..2)
            .map(|o| {
                let b = [0.25, -0.25][o];
                (hidden.iter().enumerate().map(|(i, h)| h * fcw[o * 8 + i]).sum::<f64>() + b) / 25.0
            })
            .collect();
        assert_eq!(fixed_point_infer(&m, &im).unwrap(), want);
    }

    #[test]
    fn zero_weights_give_zero_scores() {
        let mut m = toy();
        for l in &mut m.layers {
            if let Some(p) = &mut l.params {
                p.weights.iter_mut().for_each(|w| *w = 0.0);
                if let Some(b) = &mut p.bias {
                    b.iter_mut().for_each(|w| *w = 0.0);
                }
            }
        }
        assert_eq!(fixed_point_infer(&m, &toy_image()).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn shape_errors() {
        let m = toy();
        assert!(matches!(fixed_point_infer(&m, &img(3, 3, vec![0.0; 9])), Err(Error::Shape(_))));
        assert!(sc_infer(&m, &img(5, 4, vec![0.0; 20]), &ScConfig::new(8), 1).is_err());
        let bad = LayerSpec::Conv { out_channels: 1, kernel_h: 5, kernel_w: 5, stride: 1 };
        assert!(bad.output_shape(Shape { channels: 1, height: 4, width: 4 }).is_err());
    }

    #[test]
    fn sc_converges_on_toy() {
        let m = toy();
        let im = toy_image();
        let want = fixed_point_infer(&m, &im).unwrap();
        let cfg = ScConfig { b2s_mode: B2sMode::Accumulated, ..ScConfig::new(16384) };
        let got = sc_infer(&m, &im, &cfg, 3).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 0.02, "{got:?} vs {want:?}");
        }
        assert_eq!(got, sc_infer(&m, &im, &cfg, 3).unwrap());
        assert_ne!(got, sc_infer(&m, &im, &cfg, 4).unwrap());
    }

    #[test]
    fn per_cycle_relu_rectifies_noise() {
        // max(count, zero) per cycle averages above max(mean, zero)
        let m = toy();
        let im = img(4, 4, vec![0.5; 16]);
        let mut lin = m.clone();
        lin.layers.remove(1);
        let cfg = ScConfig::new(16384);
        let want = fixed_point_infer(&lin, &im).unwrap();
        let got = sc_infer(&lin, &im, &cfg, 3).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 0.02, "{got:?} vs {want:?}");
        }
        let fc = &m.layers[2].params.as_ref().unwrap();
        let per_cycle = sc_infer(&m, &im, &cfg, 3).unwrap();
        let acc = sc_infer(&m, &im, &ScConfig { b2s_mode: B2sMode::Accumulated, ..cfg.clone() }, 3).unwrap();
        // positive fc weights see inflated hidden values
        let pos: f64 = fc.weights[..8].iter().sum();
        assert!(pos > 0.0);
        assert!(per_cycle[0] > acc[0] + 0.01, "{per_cycle:?} vs {acc:?}");
    }

    #[test]
    fn blank_image_without_bias() {
        let mut m = toy();
        m.layers[2].params.as_mut().unwrap().bias = Some(vec![0.0, 0.0]);
        // all-black pixels encode -1; with a 0.5 grey image inputs are 0
        let im = img(4, 4, vec![0.5; 16]);
        assert_eq!(fixed_point_infer(&m, &im).unwrap(), vec![0.0, 0.0]);
        let cfg = ScConfig { b2s_mode: B2sMode::Accumulated, ..ScConfig::new(4096) };
        let s = sc_infer(&m, &im, &cfg, 9).unwrap();
        assert!(s.iter().all(|v| v.abs() < 0.03), "{s:?}");
    }

    #[test]
    fn json_roundtrip_and_grid_check() {
        let m = toy();
        let s = m.to_json_string().unwrap();
        assert_eq!(QuantizedModel::from_json_str(&s).unwrap(), m);
        let off_grid = s.replacen("\"weight_exp\":-7", "\"weight_exp\":-12", 1);
        assert!(matches!(QuantizedModel::from_json_str(&off_grid), Err(Error::Model(_))));
    }

    #[test]
    fn stages_and_groups() {
        let st = toy().stages().unwrap();
        assert_eq!(st.len(), 2);
        assert_eq!(st[0].groups, 1);
        assert_eq!(st[0].post, vec![LayerSpec::ReLU]);
        assert_eq!(st[1].groups, 1);
        let topo = r#"{"n_bits":8,"input":{"channels":1,"height":32,"width":32},"layers":[
            {"type":"conv","out_channels":6,"kernel":[5,5]},{"type":"relu"},{"type":"maxpool","window":2},
            {"type":"conv","out_channels":16,"kernel":[5,5]},{"type":"relu"},{"type":"maxpool","window":2},
            {"type":"fc","out_features":120},{"type":"fc","out_features":84},{"type":"fc","out_features":10}]}"#;
        let m = QuantizedModel::from_json_str(topo).unwrap();
        let g: Vec<(usize, usize)> = m.stages().unwrap().iter().map(|s| (s.neurons(), s.groups)).collect();
        assert_eq!(g, vec![(4704, 1), (1600, 6), (120, 16), (84, 5), (10, 4)]);
        assert!(fixed_point_infer(&m, &img(32, 32, vec![0.0; 1024])).is_err());
    }

    #[test]
    fn idx_roundtrip() {
        let d = Dataset { images: vec![toy_image(), img(4, 4, vec![1.0; 16])], labels: vec![3, 7] };
        let (mut a, mut b) = (Vec::new(), Vec::new());
        d.write_idx(&mut a, &mut b).unwrap();
        let back = Dataset::from_idx_bytes(&a, &b).unwrap();
        assert_eq!(back.labels, d.labels);
        for (x, y) in back.images.iter().zip(&d.images) {
            for (p, q) in x.pixels.iter().zip(&y.pixels) {
                assert!((p - q).abs() <= 0.5 / 255.0);
            }
        }
        assert!(Dataset::from_idx_bytes(&b, &a).is_err());
    }

    #[test]
    fn csv_dataset() {
        let text = "label,p0,p1,p2,p3\n1,0,255,128,0\n0,10,20,30,40\n";
        let d = Dataset::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(d.labels, vec![1, 0]);
        assert_eq!(d.images[0].shape, Shape { channels: 1, height: 2, width: 2 });
        assert_eq!(d.images[0].pixels[1], 1.0);
        assert!(Dataset::from_csv_reader("1,0,0,0\n".as_bytes()).is_err());
    }

    #[test]
    fn report_csv_roundtrip() {
        let r = vec![
            EvalReport { k: None, n_bits: 8, accuracy: 0.9, n_images: 10, seed: 0, per_class: vec![] },
            EvalReport { k: Some(32), n_bits: 8, accuracy: 0.8, n_images: 10, seed: 5, per_class: vec![] },
        ];
        let mut buf = Vec::new();
        write_reports(&r, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("k,n_bits,accuracy,n_images,seed\n"));
        assert_eq!(read_reports(&buf[..]).unwrap(), r);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let d = Dataset { images: vec![], labels: vec![] };
        assert!(accuracy_sweep(&toy(), &d, &[8], &[8], 1, &ScConfig::new(8)).is_err());
    }
}
