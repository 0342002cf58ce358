//! Layer descriptions: weights, requantization and network topology.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest |x * w| for signed int8 operands.
const MAX_PRODUCT: i64 = 128 * 128;

/// Convolution weights, output-channel-major, then tap, then input channel.
///
/// Tap `i` multiplies the input `d * i` steps in the past, so tap 0 is the
/// current step.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvWeights {
    data: Vec<i8>,
    c_out: usize,
    k: usize,
    c_in: usize,
}

impl ConvWeights {
    pub fn new(c_out: usize, k: usize, c_in: usize, data: Vec<i8>) -> Result<Self> {
        if c_out == 0 || k == 0 || c_in == 0 {
            return Err(Error::Shape(format!(
                "weight dimensions must be positive, got c_out={c_out} k={k} c_in={c_in}"
            )));
        }
        if data.len() != c_out * k * c_in {
            return Err(Error::Shape(format!(
                "weights hold {} values, expected c_out*k*c_in = {}",
                data.len(),
                c_out * k * c_in
            )));
        }
        Ok(Self { data, c_out, k, c_in })
    }

    pub fn c_out(&self) -> usize {
        self.c_out
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn c_in(&self) -> usize {
        self.c_in
    }

    pub fn data(&self) -> &[i8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, m: usize, i: usize, l: usize) -> i8 {
        self.data[(m * self.k + i) * self.c_in + l]
    }

    /// The `k * c_in` weights of output channel `m`.
    pub fn filter(&self, m: usize) -> &[i8] {
        let len = self.k * self.c_in;
        &self.data[m * len..(m + 1) * len]
    }
}

/// Per-channel integer requantization: `(mult * acc + bias) >> shift`,
/// clamped to int8 (or to `0..=127` with ReLU).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequantParams {
    pub mult: Vec<i32>,
    pub bias: Vec<i32>,
    pub shift: u32,
    pub relu: bool,
}

impl RequantParams {
    pub fn new(mult: Vec<i32>, bias: Vec<i32>, shift: u32, relu: bool) -> Result<Self> {
        if mult.len() != bias.len() {
            return Err(Error::Shape(format!(
                "requant mult has {} entries but bias has {}",
                mult.len(),
                bias.len()
            )));
        }
        if shift > 31 {
            return Err(Error::Shape(format!("requant shift must be in 0..=31, got {shift}")));
        }
        Ok(Self { mult, bias, shift, relu })
    }

    /// mult=1, bias=0, shift=0.
    pub fn identity(channels: usize, relu: bool) -> Self {
        Self { mult: alloc::vec![1; channels], bias: alloc::vec![0; channels], shift: 0, relu }
    }

    pub fn channels(&self) -> usize {
        self.mult.len()
    }

    #[inline]
    pub fn apply(&self, channel: usize, acc: i32) -> i8 {
        let v = (i64::from(self.mult[channel]) * i64::from(acc) + i64::from(self.bias[channel])) >> self.shift;
        let lo = if self.relu { 0 } else { -128 };
        v.clamp(lo, 127) as i8
    }
}

/// Geometry of a convolution or of one tile of it.
///
/// `t_in` is the number of input steps that must be resident (the whole
/// sequence for a layer, the halo-extended span for a tile).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConvShape {
    pub c_in: usize,
    pub c_out: usize,
    pub t_in: usize,
    pub t_out: usize,
    pub k: usize,
    pub d: usize,
    pub stride: usize,
}

impl ConvShape {
    /// Whole causal layer: `t_out = ceil(t_in / stride)`.
    pub fn layer(c_in: usize, t_in: usize, c_out: usize, k: usize, d: usize, stride: usize) -> Self {
        Self { c_in, c_out, t_in, t_out: t_in.div_ceil(stride.max(1)), k, d, stride }
    }

    /// Number of taps of the zero-interleaved filter.
    pub fn k_dilated(&self) -> usize {
        (self.k - 1) * self.d + 1
    }

    /// Input steps seen by one output, `(k - 1) * d`, excluding the step itself.
    pub fn halo(&self) -> usize {
        (self.k - 1) * self.d
    }

    /// Logical multiply-accumulates.
    pub fn macs(&self) -> u64 {
        (self.t_out * self.c_out * self.k * self.c_in) as u64
    }
}

/// A dilated causal 1D convolution with its weights and requantization.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayerSpec {
    pub c_in: usize,
    pub c_out: usize,
    pub t_in: usize,
    pub k: usize,
    pub d: usize,
    pub stride: usize,
    pub weights: ConvWeights,
    pub requant: RequantParams,
}

impl ConvLayerSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c_in: usize,
        c_out: usize,
        t_in: usize,
        k: usize,
        d: usize,
        stride: usize,
        weights: ConvWeights,
        requant: RequantParams,
    ) -> Result<Self> {
        let spec = Self { c_in, c_out, t_in, k, d, stride, weights, requant };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_in == 0 || self.c_out == 0 || self.t_in == 0 || self.k == 0 || self.d == 0 || self.stride == 0 {
            return Err(Error::Shape(format!(
                "conv dimensions must be positive (c_in={} c_out={} t_in={} k={} d={} stride={})",
                self.c_in, self.c_out, self.t_in, self.k, self.d, self.stride
            )));
        }
        let w = &self.weights;
        if (w.c_out(), w.k(), w.c_in()) != (self.c_out, self.k, self.c_in) {
            return Err(Error::Shape(format!(
                "weights are {}x{}x{} but layer expects c_out x k x c_in = {}x{}x{}",
                w.c_out(),
                w.k(),
                w.c_in(),
                self.c_out,
                self.k,
                self.c_in
            )));
        }
        if self.requant.channels() != self.c_out {
            return Err(Error::Shape(format!(
                "requant has {} channels, layer has c_out={}",
                self.requant.channels(),
                self.c_out
            )));
        }
        let bound = (self.k * self.c_in) as i64 * MAX_PRODUCT;
        if bound > i64::from(i32::MAX) {
            return Err(Error::Shape(format!(
                "k*c_in = {} may overflow the int32 accumulator",
                self.k * self.c_in
            )));
        }
        Ok(())
    }

    pub fn t_out(&self) -> usize {
        self.t_in.div_ceil(self.stride)
    }

    pub fn shape(&self) -> ConvShape {
        ConvShape::layer(self.c_in, self.t_in, self.c_out, self.k, self.d, self.stride)
    }

    /// Identity layer: k=1, d=1, W=I, mult=1, bias=0, shift=0.
    pub fn identity(channels: usize, t_in: usize) -> Self {
        let mut data = alloc::vec![0i8; channels * channels];
        for c in 0..channels {
            data[c * channels + c] = 1;
        }
        Self {
            c_in: channels,
            c_out: channels,
            t_in,
            k: 1,
            d: 1,
            stride: 1,
            weights: ConvWeights { data, c_out: channels, k: 1, c_in: channels },
            requant: RequantParams::identity(channels, false),
        }
    }
}

/// Fully connected layer over the flattened (TC-order) input.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSpec {
    pub in_features: usize,
    pub out_features: usize,
    /// `out_features x in_features`, row-major.
    pub weights: Vec<i8>,
    pub requant: RequantParams,
}

impl LinearSpec {
    pub fn new(in_features: usize, out_features: usize, weights: Vec<i8>, requant: RequantParams) -> Result<Self> {
        if in_features == 0 || out_features == 0 {
            return Err(Error::Shape(format!(
                "linear dimensions must be positive, got in={in_features} out={out_features}"
            )));
        }
        if weights.len() != in_features * out_features {
            return Err(Error::Shape(format!(
                "linear weights hold {} values, expected {}",
                weights.len(),
                in_features * out_features
            )));
        }
        if requant.channels() != out_features {
            return Err(Error::Shape(format!(
                "requant has {} channels, linear has {out_features} outputs",
                requant.channels()
            )));
        }
        if in_features as i64 * MAX_PRODUCT > i64::from(i32::MAX) {
            return Err(Error::Shape(format!("in_features={in_features} may overflow the int32 accumulator")));
        }
        Ok(Self { in_features, out_features, weights, requant })
    }

    /// The same computation expressed as a 1x1 convolution over one step.
    pub fn as_conv(&self) -> ConvLayerSpec {
        ConvLayerSpec {
            c_in: self.in_features,
            c_out: self.out_features,
            t_in: 1,
            k: 1,
            d: 1,
            stride: 1,
            weights: ConvWeights { data: self.weights.clone(), c_out: self.out_features, k: 1, c_in: self.in_features },
            requant: self.requant.clone(),
        }
    }
}

/// Average pooling over time, non-overlapping by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolSpec {
    pub window: usize,
    pub stride: usize,
}

impl PoolSpec {
    pub fn t_out(&self, t_in: usize) -> Result<usize> {
        if self.window == 0 || self.stride == 0 {
            return Err(Error::Shape(format!(
                "pool window and stride must be positive, got {} / {}",
                self.window, self.stride
            )));
        }
        if t_in < self.window {
            return Err(Error::Shape(format!("pool window {} exceeds {t_in} input steps", self.window)));
        }
        Ok((t_in - self.window) / self.stride + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv1D(ConvLayerSpec),
    Linear(LinearSpec),
    AvgPool1D(PoolSpec),
}

impl Layer {
    /// Output `(channels, timesteps)` for an input of the given dimensions.
    pub fn output_dims(&self, channels: usize, timesteps: usize) -> Result<(usize, usize)> {
        match self {
            Layer::Conv1D(c) => {
                if c.c_in != channels || c.t_in != timesteps {
                    return Err(Error::Shape(format!(
                        "conv expects {}x{} (c x t) input, got {channels}x{timesteps}",
                        c.c_in, c.t_in
                    )));
                }
                Ok((c.c_out, c.t_out()))
            }
            Layer::Linear(l) => {
                if l.in_features != channels * timesteps {
                    return Err(Error::Shape(format!(
                        "linear expects {} features, got {channels}x{timesteps}",
                        l.in_features
                    )));
                }
                Ok((l.out_features, 1))
            }
            Layer::AvgPool1D(p) => Ok((channels, p.t_out(timesteps)?)),
        }
    }

    /// Bytes of parameters kept in L2.
    pub fn weight_bytes(&self) -> usize {
        match self {
            Layer::Conv1D(c) => c.weights.data().len(),
            Layer::Linear(l) => l.weights.len(),
            Layer::AvgPool1D(_) => 0,
        }
    }
}

/// Ordered list of layers with consistent dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    layers: Vec<Layer>,
    input_channels: usize,
    input_timesteps: usize,
}

impl NetworkSpec {
    /// The input dimensions are taken from the first layer, which must be a
    /// convolution or pass explicit dims through [`NetworkSpec::with_input`].
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let (c, t) = match layers.first() {
            Some(Layer::Conv1D(conv)) => (conv.c_in, conv.t_in),
            Some(Layer::Linear(l)) => (l.in_features, 1),
            Some(Layer::AvgPool1D(_)) => {
                return Err(Error::Shape("a network starting with pooling needs explicit input dims".into()))
            }
            None => return Err(Error::Shape("network has no layers".into())),
        };
        Self::with_input(layers, c, t)
    }

    pub fn with_input(layers: Vec<Layer>, channels: usize, timesteps: usize) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network has no layers".into()));
        }
        let net = Self { layers, input_channels: channels, input_timesteps: timesteps };
        net.layer_dims()?;
        Ok(net)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dims(&self) -> (usize, usize) {
        (self.input_channels, self.input_timesteps)
    }

    /// `(input dims, output dims)` of every layer, in order.
    pub fn layer_dims(&self) -> Result<Vec<((usize, usize), (usize, usize))>> {
        let mut dims = Vec::with_capacity(self.layers.len());
        let mut cur = (self.input_channels, self.input_timesteps);
        for (i, layer) in self.layers.iter().enumerate() {
            let next = layer
                .output_dims(cur.0, cur.1)
                .map_err(|e| Error::Shape(format!("layer {i}: {e}")))?;
            dims.push((cur, next));
            cur = next;
        }
        Ok(dims)
    }

    pub fn output_dims(&self) -> Result<(usize, usize)> {
        Ok(self.layer_dims()?.last().map(|d| d.1).unwrap_or((self.input_channels, self.input_timesteps)))
    }
}
