//! Naive reference implementations. Everything here is written as plain
//! nested loops over the mathematical definition and serves as ground
//! truth for the optimized kernels and the tiled executor.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::layer::{ConvLayerSpec, LinearSpec, NetworkSpec, Layer, PoolSpec, RequantParams};
use crate::tensor::QuantTensorTC;

/// int32 pre-activation accumulators in TC layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccTensorTC {
    pub data: Vec<i32>,
    pub channels: usize,
    pub timesteps: usize,
}

impl AccTensorTC {
    pub fn get(&self, t: usize, c: usize) -> i32 {
        self.data[t * self.channels + c]
    }
}

/// `acc[t][m] = sum_i sum_l x[t*stride - d*i][l] * W[m][i][l]`, with
/// negative time indices reading zero.
pub fn conv1d_reference(x: &QuantTensorTC, spec: &ConvLayerSpec) -> Result<AccTensorTC> {
    if x.channels() != spec.c_in || x.timesteps() != spec.t_in {
        return Err(Error::Shape(format!(
            "input is {}x{} (c x t), layer expects {}x{}",
            x.channels(),
            x.timesteps(),
            spec.c_in,
            spec.t_in
        )));
    }
    let t_out = spec.t_out();
    let mut data = vec![0i32; t_out * spec.c_out];
    for t in 0..t_out {
        for m in 0..spec.c_out {
            let mut acc = 0i32;
            for i in 0..spec.k {
                let src = (t * spec.stride) as isize - (spec.d * i) as isize;
                if src < 0 {
                    continue;
                }
                for l in 0..spec.c_in {
                    let xv = i32::from(x.data()[src as usize * spec.c_in + l]);
                    acc += xv * i32::from(spec.weights.get(m, i, l));
                }
            }
            data[t * spec.c_out + m] = acc;
        }
    }
    Ok(AccTensorTC { data, channels: spec.c_out, timesteps: t_out })
}

/// Floor division of `v` by `2^shift`, written without the shift operator.
fn floor_pow2(v: i64, shift: u32) -> i64 {
    v.div_euclid(1i64 << shift)
}

fn requant_value(p: &RequantParams, m: usize, acc: i32) -> i8 {
    let v = floor_pow2(i64::from(p.mult[m]) * i64::from(acc) + i64::from(p.bias[m]), p.shift);
    let lo = if p.relu { 0 } else { -128 };
    if v < lo {
        lo as i8
    } else if v > 127 {
        127
    } else {
        v as i8
    }
}

pub fn requant_reference(acc: &AccTensorTC, p: &RequantParams) -> Result<QuantTensorTC> {
    if acc.channels != p.channels() {
        return Err(Error::Shape(format!(
            "accumulator has {} channels, requant has {}",
            acc.channels,
            p.channels()
        )));
    }
    let mut out = Vec::with_capacity(acc.data.len());
    for t in 0..acc.timesteps {
        for m in 0..acc.channels {
            out.push(requant_value(p, m, acc.get(t, m)));
        }
    }
    QuantTensorTC::new(acc.channels, acc.timesteps, out, 1.0)
}

pub fn layer_reference(x: &QuantTensorTC, spec: &ConvLayerSpec) -> Result<QuantTensorTC> {
    requant_reference(&conv1d_reference(x, spec)?, &spec.requant)
}

/// Dense layer over `x` (length `in_features`), returning `out_features` values.
pub fn linear_reference(x: &[i8], spec: &LinearSpec) -> Result<Vec<i8>> {
    if x.len() != spec.in_features {
        return Err(Error::Shape(format!(
            "linear expects {} inputs, got {}",
            spec.in_features,
            x.len()
        )));
    }
    let mut out = Vec::with_capacity(spec.out_features);
    for o in 0..spec.out_features {
        let mut acc = 0i32;
        for (i, &xv) in x.iter().enumerate() {
            acc += i32::from(xv) * i32::from(spec.weights[o * spec.in_features + i]);
        }
        out.push(requant_value(&spec.requant, o, acc));
    }
    Ok(out)
}

/// Integer mean over each window, truncated toward zero.
pub fn avgpool_reference(x: &QuantTensorTC, pool: PoolSpec) -> Result<QuantTensorTC> {
    let t_out = pool.t_out(x.timesteps())?;
    let c = x.channels();
    let mut out = Vec::with_capacity(t_out * c);
    for t in 0..t_out {
        for ch in 0..c {
            let mut sum = 0i32;
            for j in 0..pool.window {
                sum += i32::from(x.data()[(t * pool.stride + j) * c + ch]);
            }
            out.push((sum / pool.window as i32) as i8);
        }
    }
    QuantTensorTC::new(c, t_out, out, x.scale())
}

/// Runs every layer of `net` through the reference implementations.
pub fn network_reference(net: &NetworkSpec, x: &QuantTensorTC) -> Result<QuantTensorTC> {
    let (c, t) = net.input_dims();
    if x.channels() != c || x.timesteps() != t {
        return Err(Error::Shape(format!(
            "network input is {c}x{t} (c x t), got {}x{}",
            x.channels(),
            x.timesteps()
        )));
    }
    let mut cur = x.clone();
    for layer in net.layers() {
        cur = match layer {
            Layer::Conv1D(spec) => layer_reference(&cur, spec)?,
            Layer::Linear(spec) => {
                let out = linear_reference(cur.data(), spec)?;
                QuantTensorTC::new(spec.out_features, 1, out, 1.0)?
            }
            Layer::AvgPool1D(pool) => avgpool_reference(&cur, *pool)?,
        };
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layer::ConvWeights;
    use num_bigint::BigInt;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_layer(x: &[i8], w: &[i8], d: usize) -> (QuantTensorTC, ConvLayerSpec) {
        let t = x.len();
        let k = w.len();
        let spec = ConvLayerSpec::new(
            1,
            1,
            t,
            k,
            d,
            1,
            ConvWeights::new(1, k, 1, w.to_vec()).unwrap(),
            RequantParams::identity(1, false),
        )
        .unwrap();
        (QuantTensorTC::new(1, t, x.to_vec(), 1.0).unwrap(), spec)
    }

    #[test]
    fn running_pair_sum() {
        let (x, spec) = scalar_layer(&[1, 2, 3], &[1, 1], 1);
        assert_eq!(conv1d_reference(&x, &spec).unwrap().data, vec![1, 3, 5]);
        assert_eq!(layer_reference(&x, &spec).unwrap().data(), &[1, 3, 5]);
    }

    #[test]
    fn dilation_skips_a_step() {
        let (x, spec) = scalar_layer(&[1, 2, 3], &[1, 1], 2);
        assert_eq!(conv1d_reference(&x, &spec).unwrap().data, vec![1, 2, 4]);
        assert_eq!(layer_reference(&x, &spec).unwrap().data(), &[1, 2, 4]);
    }

    #[test]
    fn zero_weights_annihilate() {
        let (x, spec) = scalar_layer(&[5, -7, 9, 100], &[0, 0, 0], 1);
        assert!(conv1d_reference(&x, &spec).unwrap().data.iter().all(|&v| v == 0));
    }

    #[test]
    fn identity_layer_passthrough() {
        let x = QuantTensorTC::new(3, 4, vec![1, -2, 3, 4, 5, -6, 7, 8, 9, 10, -128, 127], 1.0).unwrap();
        let spec = ConvLayerSpec::identity(3, 4);
        assert_eq!(layer_reference(&x, &spec).unwrap().data(), x.data());
    }

    #[test]
    fn requant_values() {
        let acc = |v: i32| AccTensorTC { data: vec![v], channels: 1, timesteps: 1 };
        let p = RequantParams::new(vec![2], vec![56], 3, false).unwrap();
        assert_eq!(requant_reference(&acc(100), &p).unwrap().data(), &[32]);
        let p = RequantParams::new(vec![1], vec![0], 0, false).unwrap();
        assert_eq!(requant_reference(&acc(1_000_000), &p).unwrap().data(), &[127]);
        let p = RequantParams::new(vec![1], vec![0], 0, true).unwrap();
        assert_eq!(requant_reference(&acc(-5), &p).unwrap().data(), &[0]);
        let p = RequantParams::new(vec![1, 1], vec![0, 0], 0, true).unwrap();
        assert!(requant_reference(&acc(1), &p).is_err());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let (_, spec) = scalar_layer(&[1, 2, 3], &[1, 1], 1);
        let x = QuantTensorTC::new(1, 4, vec![0; 4], 1.0).unwrap();
        assert!(matches!(conv1d_reference(&x, &spec), Err(Error::Shape(_))));
    }

    #[test]
    fn linear_identity_and_pooling() {
        let mut w = vec![0i8; 9];
        for i in 0..3 {
            w[i * 3 + i] = 1;
        }
        let lin = LinearSpec::new(3, 3, w, RequantParams::identity(3, false)).unwrap();
        assert_eq!(linear_reference(&[4, -5, 6], &lin).unwrap(), vec![4, -5, 6]);

        let pool = PoolSpec { window: 2, stride: 2 };
        let x = QuantTensorTC::new(1, 4, vec![2, 4, 6, 8], 1.0).unwrap();
        assert_eq!(avgpool_reference(&x, pool).unwrap().data(), &[3, 7]);
        let x = QuantTensorTC::new(1, 2, vec![1, 2], 1.0).unwrap();
        assert_eq!(avgpool_reference(&x, pool).unwrap().data(), &[1]);
        // truncation toward zero
        let x = QuantTensorTC::new(1, 2, vec![-1, -2], 1.0).unwrap();
        assert_eq!(avgpool_reference(&x, pool).unwrap().data(), &[-1]);
    }

    fn random_layer(rng: &mut ChaCha8Rng) -> (QuantTensorTC, ConvLayerSpec) {
        let c_in = rng.gen_range(1..=8);
        let c_out = rng.gen_range(1..=8);
        let t = rng.gen_range(1..=12);
        let k = rng.gen_range(1..=4);
        let d = rng.gen_range(1..=3);
        let stride = rng.gen_range(1..=2);
        let w: Vec<i8> = (0..c_out * k * c_in).map(|_| rng.gen()).collect();
        let mult: Vec<i32> = (0..c_out).map(|_| rng.gen_range(-300..300)).collect();
        let bias: Vec<i32> = (0..c_out).map(|_| rng.gen_range(-5000..5000)).collect();
        let requant = RequantParams::new(mult, bias, rng.gen_range(0..=16), rng.gen()).unwrap();
        let spec = ConvLayerSpec::new(c_in, c_out, t, k, d, stride, ConvWeights::new(c_out, k, c_in, w).unwrap(), requant)
            .unwrap();
        let x = QuantTensorTC::new(c_in, t, (0..c_in * t).map(|_| rng.gen()).collect(), 1.0).unwrap();
        (x, spec)
    }

    /// Recomputes a layer with arbitrary-precision integers and a division
    /// based floor, then clamps.
    fn bigint_layer(x: &QuantTensorTC, spec: &ConvLayerSpec) -> Vec<i8> {
        let mut out = Vec::new();
        let div = BigInt::from(1u64 << spec.requant.shift);
        for t in 0..spec.t_out() {
            for m in 0..spec.c_out {
                let mut acc = BigInt::from(0);
                for i in 0..spec.k {
                    let Some(src) = (t * spec.stride).checked_sub(spec.d * i) else { continue };
                    for l in 0..spec.c_in {
                        acc += BigInt::from(x.get(src, l).unwrap()) * BigInt::from(spec.weights.get(m, i, l));
                    }
                }
                let v = acc * BigInt::from(spec.requant.mult[m]) + BigInt::from(spec.requant.bias[m]);
                // floor division for a positive divisor
                let q = {
                    let q = &v / &div;
                    if (&q * &div) != v && v < BigInt::from(0) { q - 1 } else { q }
                };
                let lo = BigInt::from(if spec.requant.relu { 0 } else { -128 });
                let hi = BigInt::from(127);
                let c = if q < lo { lo } else if q > hi { hi } else { q };
                out.push(i8::try_from(c).unwrap());
            }
        }
        out
    }

    #[test]
    fn matches_bigint_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let (x, spec) = random_layer(&mut rng);
            assert_eq!(layer_reference(&x, &spec).unwrap().data(), bigint_layer(&x, &spec).as_slice());
        }
    }

    fn conv_with_input(spec: &ConvLayerSpec, x: Vec<i8>) -> Vec<i32> {
        let x = QuantTensorTC::new(spec.c_in, spec.t_in, x, 1.0).unwrap();
        conv1d_reference(&x, spec).unwrap().data
    }

    proptest! {
        #[test]
        fn linear_in_input(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, spec) = random_layer(&mut rng);
            let n = spec.c_in * spec.t_in;
            let a: Vec<i8> = (0..n).map(|_| rng.gen_range(-64..64)).collect();
            let b: Vec<i8> = (0..n).map(|_| rng.gen_range(-64..64)).collect();
            let sum: Vec<i8> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
            let ya = conv_with_input(&spec, a);
            let yb = conv_with_input(&spec, b);
            let ys = conv_with_input(&spec, sum);
            for i in 0..ys.len() {
                prop_assert_eq!(ys[i], ya[i] + yb[i]);
            }
        }

        #[test]
        fn linear_in_weights(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, spec) = random_layer(&mut rng);
            let n = spec.weights.data().len();
            let wa: Vec<i8> = (0..n).map(|_| rng.gen_range(-64..64)).collect();
            let wb: Vec<i8> = (0..n).map(|_| rng.gen_range(-64..64)).collect();
            let with = |w: Vec<i8>| {
                let mut s = spec.clone();
                s.weights = ConvWeights::new(s.c_out, s.k, s.c_in, w).unwrap();
                conv1d_reference(&x, &s).unwrap().data
            };
            let ws: Vec<i8> = wa.iter().zip(&wb).map(|(p, q)| p + q).collect();
            let (ya, yb, ys) = (with(wa), with(wb), with(ws));
            for i in 0..ys.len() {
                prop_assert_eq!(ys[i], ya[i] + yb[i]);
            }
        }

        #[test]
        fn causal(seed in any::<u64>(), cut in 0usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, spec) = random_layer(&mut rng);
            let t0 = cut % spec.t_in;
            let mut masked = x.data().to_vec();
            for v in &mut masked[(t0 + 1) * spec.c_in..] {
                *v = 0;
            }
            let full = conv1d_reference(&x, &spec).unwrap();
            let cut_acc = conv_with_input(&spec, masked);
            for t in 0..spec.t_out() {
                if t * spec.stride <= t0 {
                    for m in 0..spec.c_out {
                        prop_assert_eq!(full.get(t, m), cut_acc[t * spec.c_out + m]);
                    }
                }
            }
        }

        #[test]
        fn dilation_equals_subsampled_dense(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, mut spec) = random_layer(&mut rng);
            spec.stride = 1;
            let d = spec.d;
            let full = conv1d_reference(&x, &spec).unwrap();
            for phase in 0..d.min(spec.t_in) {
                // x[phase], x[phase + d], ... as a dense sequence
                let steps: Vec<usize> = (phase..spec.t_in).step_by(d).collect();
                let mut sub = Vec::new();
                for &s in &steps {
                    sub.extend_from_slice(x.row(s));
                }
                let mut dense = spec.clone();
                dense.d = 1;
                dense.t_in = steps.len();
                let y = conv_with_input(&dense, sub);
                for (j, &s) in steps.iter().enumerate() {
                    for m in 0..spec.c_out {
                        prop_assert_eq!(full.get(s, m), y[j * spec.c_out + m]);
                    }
                }
            }
        }
    }
}
