#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcn_core::{ConvLayerSpec, ConvWeights, QuantTensorTC, RequantParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, c: usize, t: usize) -> QuantTensorTC {
    let data = (0..c * t).map(|_| rng.gen::<i8>()).collect();
    QuantTensorTC::new(c, t, data, 1.0).unwrap()
}

/// A layer whose requantization keeps a good share of outputs unsaturated.
pub fn random_layer(
    rng: &mut ChaCha8Rng,
    c_in: usize,
    c_out: usize,
    t_in: usize,
    k: usize,
    d: usize,
    stride: usize,
) -> ConvLayerSpec {
    let w = (0..c_out * k * c_in).map(|_| rng.gen::<i8>()).collect();
    let fan_in = (k * c_in) as f64;
    let shift = 7 + (fan_in.sqrt().log2().ceil() as u32).min(10) + 4;
    let requant = RequantParams::new(
        (0..c_out).map(|_| rng.gen_range(1..=32)).collect(),
        (0..c_out).map(|_| rng.gen_range(-4096..=4096)).collect(),
        shift,
        rng.gen_bool(0.5),
    )
    .unwrap();
    ConvLayerSpec::new(c_in, c_out, t_in, k, d, stride, ConvWeights::new(c_out, k, c_in, w).unwrap(), requant).unwrap()
}
