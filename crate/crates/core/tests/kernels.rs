mod common;

use common::{random_layer, random_tensor, rng};
use proptest::prelude::*;
use tcn_core::costmodel::layer_cycles;
use tcn_core::kernels::{memory_footprint, run_conv};
use tcn_core::oracle::layer_reference;
use tcn_core::{ConvShape, HardwareModel, KernelVariant};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_variant_matches_the_oracle(
        seed in any::<u64>(),
        c_in in 1usize..24,
        c_out in 1usize..24,
        t in 1usize..40,
        k in prop::sample::select(vec![1usize, 2, 3, 5, 7]),
        d in prop::sample::select(vec![1usize, 2, 4, 16]),
        stride in 1usize..3,
        workers in prop::sample::select(vec![1usize, 2, 3, 4, 8]),
    ) {
        let mut r = rng(seed);
        let spec = random_layer(&mut r, c_in, c_out, t, k, d, stride);
        let x = random_tensor(&mut r, c_in, t);
        let want = layer_reference(&x, &spec).unwrap();
        let hw = HardwareModel::default();
        for v in KernelVariant::ALL {
            let (y, _) = run_conv(v, &x, &spec, &hw, workers).unwrap();
            prop_assert_eq!(y.data(), want.data(), "{} with {} workers", v, workers);
        }
    }
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let mut r = rng(7);
    let spec = random_layer(&mut r, 13, 9, 37, 3, 4, 1);
    let x = random_tensor(&mut r, 13, 37);
    let hw = HardwareModel::default();
    for v in KernelVariant::ALL {
        let (base, base_trace) = run_conv(v, &x, &spec, &hw, 1).unwrap();
        for w in 2..=hw.n_cores {
            let (y, trace) = run_conv(v, &x, &spec, &hw, w).unwrap();
            assert_eq!(y, base);
            // Work is conserved, only its distribution changes.
            assert_eq!(trace.macgroup_ops, base_trace.macgroup_ops);
            assert_eq!(trace.elements_copied, base_trace.elements_copied);
        }
    }
}

#[test]
fn worker_count_is_bounded_by_cores() {
    let mut r = rng(1);
    let spec = random_layer(&mut r, 4, 4, 8, 3, 1, 1);
    let x = random_tensor(&mut r, 4, 8);
    let hw = HardwareModel::default();
    assert!(run_conv(KernelVariant::Im2col, &x, &spec, &hw, 0).is_err());
    assert!(run_conv(KernelVariant::Im2col, &x, &spec, &hw, hw.n_cores + 1).is_err());
}

#[test]
fn dilation_inflates_no_im2col_work_by_k_eff_over_k() {
    let mut r = rng(3);
    let hw = HardwareModel::default();
    let x = random_tensor(&mut r, 64, 256);
    let d1 = random_layer(&mut r, 64, 32, 256, 3, 1, 1);
    let d2 = random_layer(&mut r, 64, 32, 256, 3, 2, 1);
    let (_, t1) = run_conv(KernelVariant::NoIm2col, &x, &d1, &hw, hw.n_cores).unwrap();
    let (_, t2) = run_conv(KernelVariant::NoIm2col, &x, &d2, &hw, hw.n_cores).unwrap();
    assert_eq!(t2.macgroup_ops * 3, t1.macgroup_ops * 5);
    // Im2col and Indirect do the same work whatever the dilation.
    for v in [KernelVariant::Im2col, KernelVariant::Indirect] {
        let (_, a) = run_conv(v, &x, &d1, &hw, hw.n_cores).unwrap();
        let (_, b) = run_conv(v, &x, &d2, &hw, hw.n_cores).unwrap();
        assert_eq!(a.macgroup_ops, b.macgroup_ops);
        assert_eq!(a.total_cycles_event, b.total_cycles_event);
    }
}

#[test]
fn gather_accounting() {
    let mut r = rng(5);
    let hw = HardwareModel::default();
    let (c_in, t, k) = (10, 21, 3);
    let spec = random_layer(&mut r, c_in, 6, t, k, 2, 1);
    let x = random_tensor(&mut r, c_in, t);
    let (_, im) = run_conv(KernelVariant::Im2col, &x, &spec, &hw, 4).unwrap();
    assert_eq!(im.dma_invocations, (t * k) as u64);
    assert_eq!(im.elements_copied, (t * k * c_in) as u64);
    assert_eq!(im.offset_entries, 0);
    let (_, ind) = run_conv(KernelVariant::Indirect, &x, &spec, &hw, 4).unwrap();
    assert_eq!(ind.dma_invocations, 0);
    assert_eq!(ind.offset_entries, (t * k) as u64);
    assert_eq!(ind.elements_copied, (t * k * hw.offset_bytes) as u64);
    assert_eq!(ind.segment_loops, ind.mm_iterations * k as u64);
    let (_, no) = run_conv(KernelVariant::NoIm2col, &x, &spec, &hw, 4).unwrap();
    assert_eq!((no.dma_invocations, no.elements_copied, no.offset_entries), (0, 0, 0));
    assert_eq!(no.gather_cycles_event, 0.0);
}

#[test]
fn model_equals_trace_on_every_shape() {
    let hw = HardwareModel::default();
    let mut r = rng(11);
    for (c_in, c_out, t, k, d, stride) in
        [(64, 64, 256, 3, 1, 1), (7, 9, 13, 3, 2, 1), (33, 5, 64, 5, 4, 2), (1, 1, 1, 1, 1, 1), (16, 30, 17, 7, 16, 1)]
    {
        let spec = random_layer(&mut r, c_in, c_out, t, k, d, stride);
        let x = random_tensor(&mut r, c_in, t);
        for v in KernelVariant::ALL {
            let (_, trace) = run_conv(v, &x, &spec, &hw, hw.n_cores).unwrap();
            let p = layer_cycles(v, &spec.shape(), &hw);
            assert_eq!(trace.total_cycles_event, p.total_cyc, "{v} on {:?}", spec.shape());
        }
    }
}

#[test]
fn footprints_from_the_reference_table() {
    let hw = HardwareModel::default();
    let s = ConvShape::layer(256, 16, 256, 3, 2, 1);
    assert_eq!(memory_footprint(KernelVariant::Im2col, &s, &hw).gather, 12_288);
    assert_eq!(memory_footprint(KernelVariant::Indirect, &s, &hw).gather, 192);
    let s = ConvShape::layer(1024, 16, 1024, 3, 2, 1);
    assert_eq!(memory_footprint(KernelVariant::Im2col, &s, &hw).gather, 49_152);
    assert_eq!(memory_footprint(KernelVariant::Indirect, &s, &hw).gather, 192);
    let d1 = memory_footprint(KernelVariant::NoIm2col, &ConvShape::layer(64, 256, 32, 3, 1, 1), &hw);
    let d2 = memory_footprint(KernelVariant::NoIm2col, &ConvShape::layer(64, 256, 32, 3, 2, 1), &hw);
    assert_eq!(d2.weights - d1.weights, 4096);
}
