//! Seeded network skeletons with random int8 weights.
//!
//! - `temponet`: 9 weight layers (7 conv + 2 linear) with pooling,
//!   shrinking time from 256 steps while channels grow to 128.
//! - `sound`: 8 residual-style conv layers, 150 channels, 16 steps, K=7.
//! - `lm`: 10 conv layers, 450 channels, 50 steps, K=5, dilations doubling
//!   from 1 to 16 twice.
//! - `identity`: one 1x1 conv that copies its input.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcn_core::oracle::{avgpool_reference, conv1d_reference, layer_reference, linear_reference, AccTensorTC};
use tcn_core::{
    ConvLayerSpec, ConvWeights, Layer, LinearSpec, NetworkSpec, PoolSpec, QuantTensorTC, RequantParams,
};

use crate::error::{Result, ToolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKind {
    Temponet,
    Sound,
    Lm,
    Identity,
}

impl NetKind {
    pub const ALL: [NetKind; 4] = [NetKind::Temponet, NetKind::Sound, NetKind::Lm, NetKind::Identity];

    pub fn name(self) -> &'static str {
        match self {
            NetKind::Temponet => "temponet",
            NetKind::Sound => "sound",
            NetKind::Lm => "lm",
            NetKind::Identity => "identity",
        }
    }
}

impl fmt::Display for NetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NetKind {
    type Err = ToolError;

    fn from_str(s: &str) -> Result<Self> {
        NetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ToolError::Usage(format!("unknown network kind {s:?}")))
    }
}

/// A layer before its requantization is fixed.
enum Draft {
    Conv { c_in: usize, c_out: usize, t_in: usize, k: usize, d: usize, stride: usize, relu: bool },
    Linear { in_features: usize, out_features: usize, relu: bool },
    Pool(usize),
}

fn conv(c_in: usize, c_out: usize, t_in: usize, k: usize, d: usize, stride: usize) -> Draft {
    Draft::Conv { c_in, c_out, t_in, k, d, stride, relu: true }
}

/// Picks a shift that maps the 99th percentile of `|mult * acc|` to about
/// 96, and a bias of up to a quarter of the output range.
fn requant_for(rng: &mut ChaCha8Rng, acc: &AccTensorTC, relu: bool) -> RequantParams {
    let mult: Vec<i32> = (0..acc.channels).map(|_| rng.gen_range(16..=64)).collect();
    let mut mags: Vec<i64> = acc
        .data
        .iter()
        .enumerate()
        .map(|(i, &a)| (i64::from(mult[i % acc.channels]) * i64::from(a)).abs())
        .collect();
    mags.sort_unstable();
    let p99 = mags[(mags.len() * 99 / 100).min(mags.len() - 1)].max(1);
    let mut shift = 0u32;
    while shift < 31 && (p99 >> shift) > 96 {
        shift += 1;
    }
    let unit = 1i64 << shift;
    let bias = (0..acc.channels).map(|_| (rng.gen_range(-32i64..=32) * unit).clamp(-(1 << 30), 1 << 30) as i32).collect();
    RequantParams::new(mult, bias, shift, relu).expect("generated requant is valid")
}

/// Materializes the drafts with random weights, fixing each layer's
/// requantization on a seeded probe input propagated through the network.
fn build(drafts: Vec<Draft>, in_dims: (usize, usize), rng: &mut ChaCha8Rng) -> NetworkSpec {
    let (c, t) = in_dims;
    let mut probe = QuantTensorTC::new(c, t, (0..c * t).map(|_| rng.gen::<i8>()).collect(), 1.0).expect("dims are positive");
    let mut layers = Vec::with_capacity(drafts.len());
    for d in drafts {
        let layer = match d {
            Draft::Conv { c_in, c_out, t_in, k, d, stride, relu } => {
                let w = (0..c_out * k * c_in).map(|_| rng.gen::<i8>()).collect();
                let w = ConvWeights::new(c_out, k, c_in, w).expect("generated weights are valid");
                let mut spec = ConvLayerSpec::new(c_in, c_out, t_in, k, d, stride, w, RequantParams::identity(c_out, relu))
                    .expect("generated layer is valid");
                spec.requant = requant_for(rng, &conv1d_reference(&probe, &spec).expect("probe fits"), relu);
                probe = layer_reference(&probe, &spec).expect("probe fits");
                Layer::Conv1D(spec)
            }
            Draft::Linear { in_features, out_features, relu } => {
                let w = (0..in_features * out_features).map(|_| rng.gen::<i8>()).collect();
                let mut spec = LinearSpec::new(in_features, out_features, w, RequantParams::identity(out_features, relu))
                    .expect("generated layer is valid");
                let flat = QuantTensorTC::new(in_features, 1, probe.data().to_vec(), 1.0).expect("probe fits");
                spec.requant = requant_for(rng, &conv1d_reference(&flat, &spec.as_conv()).expect("probe fits"), relu);
                let out = linear_reference(probe.data(), &spec).expect("probe fits");
                probe = QuantTensorTC::new(out_features, 1, out, 1.0).expect("dims are positive");
                Layer::Linear(spec)
            }
            Draft::Pool(window) => {
                let p = PoolSpec { window, stride: window };
                probe = avgpool_reference(&probe, p).expect("probe fits");
                Layer::AvgPool1D(p)
            }
        };
        layers.push(layer);
    }
    NetworkSpec::with_input(layers, c, t).expect("generated network is consistent")
}

pub fn generate(kind: NetKind, seed: u64) -> NetworkSpec {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        NetKind::Temponet => build(
            vec![
                conv(16, 32, 256, 3, 2, 1),
                conv(32, 32, 256, 3, 2, 1),
                conv(32, 64, 256, 5, 1, 2),
                Draft::Pool(2),
                conv(64, 64, 64, 3, 4, 1),
                conv(64, 64, 64, 3, 4, 1),
                conv(64, 128, 64, 5, 1, 2),
                Draft::Pool(2),
                conv(128, 128, 16, 3, 8, 1),
                Draft::Pool(4),
                Draft::Linear { in_features: 128 * 4, out_features: 64, relu: true },
                Draft::Linear { in_features: 64, out_features: 8, relu: false },
            ],
            (16, 256),
            &mut r,
        ),
        NetKind::Sound => {
            build([1, 1, 2, 2, 4, 4, 8, 8].iter().map(|&d| conv(150, 150, 16, 7, d, 1)).collect(), (150, 16), &mut r)
        }
        NetKind::Lm => build(
            [1, 2, 4, 8, 16, 1, 2, 4, 8, 16].iter().map(|&d| conv(450, 450, 50, 5, d, 1)).collect(),
            (450, 50),
            &mut r,
        ),
        NetKind::Identity => NetworkSpec::new(vec![Layer::Conv1D(ConvLayerSpec::identity(8, 32))])
            .expect("identity network is consistent"),
    }
}

/// Uniform random input for `net`.
pub fn random_input(net: &NetworkSpec, seed: u64) -> QuantTensorTC {
    let (c, t) = net.input_dims();
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..c * t).map(|_| r.gen::<i8>()).collect();
    QuantTensorTC::new(c, t, data, 1.0).expect("dims are positive")
}
