mod common;

use common::{random_layer, random_tensor, rng};
use rand::Rng;
use tcn_core::kernels::{memory_footprint, run_conv};
use tcn_core::mapper::{
    evaluate_tiling, execute_plan, layer_tiles, plan_network, select_kernel, tile_search, LayerKernel, MappingPlan,
    Objective, TransferKind,
};
use tcn_core::oracle::network_reference;
use tcn_core::{ConvShape, Error, HardwareModel, KernelVariant, Layer, NetworkSpec, PoolSpec, Sequential};

fn hw() -> HardwareModel {
    HardwareModel::default()
}

#[test]
fn tiles_partition_the_output_grid() {
    let s = ConvShape::layer(8, 37, 22, 3, 4, 1);
    for (tt, tc) in [(4, 4), (6, 8), (37, 22), (10, 20)] {
        let mut covered = vec![0u8; 37 * 22];
        for tile in layer_tiles(&s, tt, tc) {
            for t in tile.t_start..tile.t_start + tile.t_len {
                for c in tile.c_start..tile.c_start + tile.c_len {
                    covered[t * 22 + c] += 1;
                }
            }
            let halo_start = (tile.t_start as isize - 8).max(0) as usize;
            assert_eq!(tile.in_start, halo_start);
            assert_eq!(tile.in_start + tile.in_len, tile.t_start + tile.t_len);
        }
        assert!(covered.iter().all(|&n| n == 1));
    }
}

#[test]
fn fitting_layer_is_one_tile() {
    let s = ConvShape::layer(16, 32, 16, 3, 1, 1);
    for v in KernelVariant::ALL {
        let p = tile_search(&s, v, &hw(), Objective::Model).unwrap();
        assert_eq!((p.tile_t_out, p.tile_c_out, p.n_tiles()), (32, 16, 1));
        assert!(p.border_tile_dims.is_empty());
    }
}

#[test]
fn large_im2col_layer_is_infeasible_and_names_the_gather_buffer() {
    let s = ConvShape::layer(1024, 16, 1024, 3, 2, 1);
    match tile_search(&s, KernelVariant::Im2col, &hw(), Objective::Model) {
        Err(Error::Infeasible { limiting, required, available, .. }) => {
            assert_eq!(limiting.name(), "gather");
            assert!(required > available);
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
    let p = tile_search(&s, KernelVariant::Indirect, &hw(), Objective::Model).unwrap();
    assert!(p.memory.total() <= hw().l1_bytes);
    assert_eq!(p.memory.gather, 192);
}

#[test]
fn model_objective_dominates() {
    let mut r = rng(21);
    for _ in 0..25 {
        let s = ConvShape::layer(
            r.gen_range(1..300),
            r.gen_range(1..80),
            r.gen_range(1..300),
            [1, 3, 5][r.gen_range(0..3)],
            [1, 2, 4, 8][r.gen_range(0..4)],
            1,
        );
        for v in KernelVariant::ALL {
            let Ok(best) = tile_search(&s, v, &hw(), Objective::Model) else { continue };
            for o in [Objective::Memory, Objective::Heuristic] {
                let other = tile_search(&s, v, &hw(), o).unwrap();
                assert!(best.predicted_cycles <= other.predicted_cycles);
            }
        }
    }
}

#[test]
fn every_candidate_plan_respects_l1() {
    let s = ConvShape::layer(200, 30, 96, 5, 4, 1);
    for v in KernelVariant::ALL {
        for tt in 1..=30 {
            for tc in 1..=96 {
                if let Some(p) = evaluate_tiling(&s, v, &hw(), tt, tc) {
                    for tile in layer_tiles(&s, tt, tc) {
                        assert!(memory_footprint(v, &tile.shape(&s), &hw()).total() <= hw().l1_bytes);
                    }
                    assert!(p.memory.total() <= hw().l1_bytes);
                }
            }
        }
    }
}

#[test]
fn no_pressure_selection_follows_the_untiled_ranking() {
    let big = HardwareModel { l1_bytes: 1 << 30, l2_bytes: 1 << 31, alpha: 0.0, beta: 0.0, ..hw() };
    let mut r = rng(2);
    for _ in 0..20 {
        let s = ConvShape::layer(r.gen_range(1..128), r.gen_range(1..64), r.gen_range(1..128), 3, r.gen_range(1..5), 1);
        let ranked = tcn_core::costmodel::rank_variants(&s, &big);
        let p = select_kernel(&s, &big, Objective::Model, &KernelVariant::ALL).unwrap();
        assert_eq!(p.variant, ranked[0].0);
        assert_eq!((p.tile_t_out, p.tile_c_out), (s.t_out, s.c_out));
    }
}

/// Runs `plan` and compares its event cycles per variant with the plan's
/// predictions; returns the executed total.
fn run_plan(net: &NetworkSpec, plan: &MappingPlan, seed: u64) -> f64 {
    let (c, t) = net.input_dims();
    let x = random_tensor(&mut rng(seed), c, t);
    let hw = hw();
    let run = execute_plan(&Sequential, net, plan, &x, &hw, hw.n_cores).unwrap();
    assert_eq!(run.output, network_reference(net, &x).unwrap());
    for (l, p) in run.layers.iter().zip(&plan.layers) {
        assert_eq!(l.event_cycles(), p.predicted_cycles);
    }
    run.event_cycles()
}

#[test]
fn selection_matches_exhaustive_instrumented_execution() {
    let hw = hw();
    let mut r = rng(99);
    let mut shapes = vec![(64, 64, 64, 3, 1), (64, 16, 64, 3, 2), (128, 16, 128, 3, 2)];
    for _ in 0..22 {
        shapes.push((r.gen_range(1..160), r.gen_range(1..48), r.gen_range(1..160), [1, 3, 5, 7][r.gen_range(0..4)], [1, 2, 4, 16][r.gen_range(0..4)]));
    }
    for (i, &(c_in, t, c_out, k, d)) in shapes.iter().enumerate() {
        let spec = random_layer(&mut r, c_in, c_out, t, k, d, 1);
        let net = NetworkSpec::new(vec![Layer::Conv1D(spec.clone())]).unwrap();
        let chosen = plan_network(&net, &hw, Objective::Model, None).unwrap();
        let mut best: Option<(KernelVariant, f64)> = None;
        for v in KernelVariant::ALL {
            let Ok(forced) = plan_network(&net, &hw, Objective::Model, Some(v)) else { continue };
            let ev = run_plan(&net, &forced, i as u64);
            if best.map_or(true, |(_, b)| ev < b) {
                best = Some((v, ev));
            }
        }
        assert_eq!(chosen.layers[0].kernel, LayerKernel::Conv(best.unwrap().0), "{:?}", spec.shape());
    }
}

#[test]
fn time_tiled_layer_matches_untiled_output() {
    let mut r = rng(4);
    let spec = random_layer(&mut r, 64, 64, 256, 3, 1, 1);
    let x = random_tensor(&mut r, 64, 256);
    let hw = hw();
    let net = NetworkSpec::new(vec![Layer::Conv1D(spec.clone())]).unwrap();
    let mut plan = plan_network(&net, &hw, Objective::Model, Some(KernelVariant::Im2col)).unwrap();
    plan.layers[0].tile_t_out = 64;
    plan.layers[0].tile_c_out = 64;
    let run = execute_plan(&Sequential, &net, &plan, &x, &hw, 8).unwrap();
    let (want, _) = run_conv(KernelVariant::Im2col, &x, &spec, &hw, 8).unwrap();
    assert_eq!(run.output, want);
    let inputs: Vec<usize> =
        run.dma.transfers.iter().filter(|t| t.kind == TransferKind::Input).map(|t| t.bytes).collect();
    // Later tiles reload the (K-1)*d halo steps.
    assert_eq!(inputs, vec![64 * 64, 66 * 64, 66 * 64, 66 * 64]);
}

#[test]
fn single_tile_plan_moves_the_whole_layer_once() {
    let mut r = rng(6);
    let spec = random_layer(&mut r, 16, 8, 20, 3, 2, 1);
    let net = NetworkSpec::new(vec![Layer::Conv1D(spec)]).unwrap();
    let plan = plan_network(&net, &hw(), Objective::Model, None).unwrap();
    let x = random_tensor(&mut r, 16, 20);
    let run = execute_plan(&Sequential, &net, &plan, &x, &hw(), 8).unwrap();
    let kinds: Vec<(TransferKind, usize)> = run.dma.transfers.iter().map(|t| (t.kind, t.bytes)).collect();
    let w = memory_footprint(
        match plan.layers[0].kernel {
            LayerKernel::Conv(v) => v,
            _ => unreachable!(),
        },
        &ConvShape::layer(16, 20, 8, 3, 2, 1),
        &hw(),
    )
    .weights;
    assert_eq!(kinds, vec![(TransferKind::Weights, w), (TransferKind::Input, 320), (TransferKind::Output, 160)]);
}

#[test]
fn mixed_network_executes_bit_exactly() {
    let mut r = rng(8);
    let c1 = random_layer(&mut r, 12, 24, 40, 3, 1, 1);
    let c2 = random_layer(&mut r, 24, 24, 40, 5, 4, 1);
    let c3 = random_layer(&mut r, 24, 16, 20, 3, 2, 2);
    let weights = (0..16 * 10 * 5).map(|_| r.gen::<i8>()).collect();
    let lin = tcn_core::LinearSpec::new(160, 5, weights, tcn_core::RequantParams::identity(5, false)).unwrap();
    let net = NetworkSpec::new(vec![
        Layer::Conv1D(c1),
        Layer::Conv1D(c2),
        Layer::AvgPool1D(PoolSpec { window: 2, stride: 2 }),
        Layer::Conv1D(c3),
        Layer::Linear(lin),
    ])
    .unwrap();
    for o in Objective::ALL {
        let plan = plan_network(&net, &hw(), o, None).unwrap();
        assert_eq!(plan.layers[2].kernel, LayerKernel::AvgPool);
        assert_eq!(plan.layers[4].kernel, LayerKernel::Linear);
        let total = run_plan(&net, &plan, 1);
        assert_eq!(total, plan.total_predicted_cycles);
    }
}

#[test]
fn pooling_tiles_when_l1_is_small() {
    let small = HardwareModel { l1_bytes: 1000, ..hw() };
    let net = NetworkSpec::with_input(vec![Layer::AvgPool1D(PoolSpec { window: 4, stride: 4 })], 50, 64).unwrap();
    let plan = plan_network(&net, &small, Objective::Model, None).unwrap();
    assert!(plan.layers[0].tile_t_out < 16);
    let x = random_tensor(&mut rng(0), 50, 64);
    let run = execute_plan(&Sequential, &net, &plan, &x, &small, 8).unwrap();
    assert_eq!(run.output, network_reference(&net, &x).unwrap());
    assert_eq!(run.event_cycles(), plan.total_predicted_cycles);
}

#[test]
fn oom_lists_every_offending_layer() {
    let mut r = rng(9);
    let tiny = HardwareModel { l1_bytes: 2048, l2_bytes: 1 << 20, ..hw() };
    let net = NetworkSpec::new(vec![
        Layer::Conv1D(random_layer(&mut r, 8, 8, 16, 3, 1, 1)),
        Layer::Conv1D(random_layer(&mut r, 8, 300, 16, 3, 1, 1)),
        Layer::Conv1D(random_layer(&mut r, 300, 8, 16, 3, 1, 1)),
    ])
    .unwrap();
    match plan_network(&net, &tiny, Objective::Model, None) {
        Err(Error::Oom { layers, .. }) => assert_eq!(layers, vec![2]),
        other => panic!("expected OOM, got {other:?}"),
    }
    let l2 = HardwareModel { l2_bytes: 5000, l1_bytes: 4096, ..hw() };
    match plan_network(&net, &l2, Objective::Model, None) {
        Err(Error::Oom { layers, reason }) => {
            assert_eq!(layers, vec![1, 2]);
            assert!(reason.contains("L2"));
        }
        other => panic!("expected OOM, got {other:?}"),
    }
}

#[test]
fn corrupted_plans_are_rejected() {
    let mut r = rng(10);
    let spec = random_layer(&mut r, 8, 8, 16, 3, 1, 1);
    let net = NetworkSpec::new(vec![Layer::Conv1D(spec)]).unwrap();
    let plan = plan_network(&net, &hw(), Objective::Model, None).unwrap();
    let x = random_tensor(&mut r, 8, 16);
    let mut cases = Vec::new();
    let mut p = plan.clone();
    p.layers[0].tile_t_out = 17;
    cases.push(p);
    let mut p = plan.clone();
    p.layers[0].tile_c_out = 0;
    cases.push(p);
    let mut p = plan.clone();
    p.layers[0].kernel = LayerKernel::AvgPool;
    cases.push(p);
    let mut p = plan.clone();
    p.layers.clear();
    cases.push(p);
    for p in cases {
        assert!(matches!(execute_plan(&Sequential, &net, &p, &x, &hw(), 8), Err(Error::Config(_))));
    }
    let cramped = HardwareModel { l1_bytes: 256, ..hw() };
    assert!(matches!(execute_plan(&Sequential, &net, &plan, &x, &cramped, 8), Err(Error::Config(_))));
}

#[test]
fn one_layer_network_equals_select_kernel() {
    let mut r = rng(12);
    let spec = random_layer(&mut r, 256, 256, 16, 3, 2, 1);
    let net = NetworkSpec::new(vec![Layer::Conv1D(spec.clone())]).unwrap();
    let plan = plan_network(&net, &hw(), Objective::Model, None).unwrap();
    let sel = select_kernel(&spec.shape(), &hw(), Objective::Model, &KernelVariant::ALL).unwrap();
    assert_eq!(plan.layers[0].kernel, LayerKernel::Conv(sel.variant));
    assert_eq!((plan.layers[0].tile_t_out, plan.layers[0].tile_c_out), (sel.tile_t_out, sel.tile_c_out));
    assert_eq!(plan.total_predicted_cycles, sel.predicted_cycles);
}
