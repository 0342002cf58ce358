use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::Objective;
use crate::costmodel::layer_cycles;
use crate::error::{Buffer, Error, Result};
use crate::hw::HardwareModel;
use crate::kernels::{memory_footprint, KernelVariant, MemoryBreakdown};
use crate::layer::ConvShape;

/// One output tile and the input steps it needs in L1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub t_start: usize,
    pub t_len: usize,
    pub c_start: usize,
    pub c_len: usize,
    /// First input step loaded (the causal halo, clipped at 0).
    pub in_start: usize,
    pub in_len: usize,
}

impl Tile {
    /// The tile viewed as a small layer, for the cost and memory models.
    pub fn shape(&self, layer: &ConvShape) -> ConvShape {
        ConvShape { c_out: self.c_len, t_in: self.in_len, t_out: self.t_len, ..*layer }
    }
}

/// Input steps `(start, len)` read by output steps `t0..t0 + tt`.
pub fn input_span(layer: &ConvShape, t0: usize, tt: usize) -> (usize, usize) {
    let start = (t0 * layer.stride).saturating_sub(layer.halo());
    let end = (t0 + tt - 1) * layer.stride;
    (start, end - start + 1)
}

/// Tiles of `layer` for the given tile dims, channel tiles outermost and
/// time innermost (the order the executor walks them).
pub fn layer_tiles(layer: &ConvShape, tile_t: usize, tile_c: usize) -> Vec<Tile> {
    let mut tiles = Vec::new();
    for c_start in (0..layer.c_out).step_by(tile_c) {
        let c_len = tile_c.min(layer.c_out - c_start);
        for t_start in (0..layer.t_out).step_by(tile_t) {
            let t_len = tile_t.min(layer.t_out - t_start);
            let (in_start, in_len) = input_span(layer, t_start, t_len);
            tiles.push(Tile { t_start, t_len, c_start, c_len, in_start, in_len });
        }
    }
    tiles
}

/// Best tiling of one layer for one kernel variant.
#[derive(Debug, Clone, PartialEq)]
pub struct TilePlan {
    pub variant: KernelVariant,
    pub tile_t_out: usize,
    pub tile_c_out: usize,
    /// Tiles with the full `tile_t_out x tile_c_out` dims.
    pub n_body_tiles: usize,
    /// `(t, c)` dims of the smaller tiles at the grid borders, one entry per tile.
    pub border_tile_dims: Vec<(usize, usize)>,
    /// Footprint of the largest tile.
    pub memory: MemoryBreakdown,
    pub kernel_cycles: f64,
    pub dma_cycles: f64,
    pub predicted_cycles: f64,
}

impl TilePlan {
    pub fn n_tiles(&self) -> usize {
        self.n_body_tiles + self.border_tile_dims.len()
    }

    pub fn utilization(&self, hw: &HardwareModel) -> f64 {
        self.memory.total() as f64 / hw.l1_bytes as f64
    }
}

/// Bytes moved from L2 for the weights of `c_len` output channels.
pub(crate) fn weight_transfer_bytes(variant: KernelVariant, layer: &ConvShape, c_len: usize) -> usize {
    let taps = match variant {
        KernelVariant::NoIm2col => layer.k_dilated(),
        _ => layer.k,
    };
    c_len * taps * layer.c_in
}

/// Scores one tiling; `None` if some tile overflows L1.
pub fn evaluate_tiling(
    layer: &ConvShape,
    variant: KernelVariant,
    hw: &HardwareModel,
    tile_t: usize,
    tile_c: usize,
) -> Option<TilePlan> {
    if tile_t == 0 || tile_c == 0 || tile_t > layer.t_out || tile_c > layer.c_out {
        return None;
    }
    let mut classes = alloc::vec![(tile_c, layer.c_out / tile_c)];
    if layer.c_out % tile_c != 0 {
        classes.push((layer.c_out % tile_c, 1));
    }
    let mut memory = MemoryBreakdown::default();
    let mut kernel = 0.0;
    let mut dma = 0.0;
    let mut n_body = 0;
    let mut border = Vec::new();
    for &(c_len, count) in &classes {
        let mut kernel_c = 0.0;
        let mut dma_c = hw.transfer_cycles(weight_transfer_bytes(variant, layer, c_len));
        for t_start in (0..layer.t_out).step_by(tile_t) {
            let t_len = tile_t.min(layer.t_out - t_start);
            let (_, in_len) = input_span(layer, t_start, t_len);
            let shape = ConvShape { c_out: c_len, t_in: in_len, t_out: t_len, ..*layer };
            let m = memory_footprint(variant, &shape, hw);
            if m.total() > hw.l1_bytes {
                return None;
            }
            if m.total() > memory.total() {
                memory = m;
            }
            kernel_c += layer_cycles(variant, &shape, hw).total_cyc;
            dma_c += hw.transfer_cycles(in_len * layer.c_in) + hw.transfer_cycles(t_len * c_len);
            if t_len == tile_t && c_len == tile_c {
                n_body += count;
            } else {
                border.extend(core::iter::repeat((t_len, c_len)).take(count));
            }
        }
        kernel += count as f64 * kernel_c;
        dma += count as f64 * dma_c;
    }
    Some(TilePlan {
        variant,
        tile_t_out: tile_t,
        tile_c_out: tile_c,
        n_body_tiles: n_body,
        border_tile_dims: border,
        memory,
        kernel_cycles: kernel,
        dma_cycles: dma,
        predicted_cycles: kernel + dma,
    })
}

/// Even values in `[4, n]` plus `n` itself.
fn time_candidates(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (4..=n).step_by(2).collect();
    if v.last() != Some(&n) {
        v.push(n);
    }
    v
}

/// Multiples of 4 in `[4, n]` plus `n` itself.
fn channel_candidates(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (4..=n).step_by(4).collect();
    if v.last() != Some(&n) {
        v.push(n);
    }
    v
}

fn heuristic_score(p: &TilePlan, layer: &ConvShape, hw: &HardwareModel) -> f64 {
    let mut s = p.utilization(hw);
    if layer.t_out % p.tile_t_out == 0 {
        s += 0.5;
    }
    if layer.c_out % p.tile_c_out == 0 {
        s += 0.5;
    }
    s
}

/// `Less` when `a` is the better plan under `objective`. Remaining ties go
/// to fewer, larger tiles: wider channel tiles first, then longer.
fn compare(a: &TilePlan, b: &TilePlan, objective: Objective, layer: &ConvShape, hw: &HardwareModel) -> Ordering {
    let primary = match objective {
        Objective::Model => a.predicted_cycles.total_cmp(&b.predicted_cycles),
        Objective::Memory => b.utilization(hw).total_cmp(&a.utilization(hw)),
        Objective::Heuristic => heuristic_score(b, layer, hw).total_cmp(&heuristic_score(a, layer, hw)),
    };
    primary
        .then_with(|| b.tile_c_out.cmp(&a.tile_c_out))
        .then_with(|| b.tile_t_out.cmp(&a.tile_t_out))
}

/// Searches every candidate tiling of `layer` for `variant` and returns the
/// best feasible one under `objective`.
pub fn tile_search(
    layer: &ConvShape,
    variant: KernelVariant,
    hw: &HardwareModel,
    objective: Objective,
) -> Result<TilePlan> {
    if layer.t_out == 0 || layer.c_out == 0 || layer.c_in == 0 || layer.k == 0 {
        return Err(Error::Shape(format!("cannot tile an empty layer {layer:?}")));
    }
    let ts = time_candidates(layer.t_out);
    let cs = channel_candidates(layer.c_out);
    let mut best: Option<TilePlan> = None;
    for &tc in &cs {
        for &tt in &ts {
            if let Some(p) = evaluate_tiling(layer, variant, hw, tt, tc) {
                if best.as_ref().map_or(true, |b| compare(&p, b, objective, layer, hw) == Ordering::Less) {
                    best = Some(p);
                }
            }
        }
    }
    best.ok_or_else(|| infeasible(layer, variant, hw, ts[0], cs[0]))
}

fn infeasible(layer: &ConvShape, variant: KernelVariant, hw: &HardwareModel, tt: usize, tc: usize) -> Error {
    // Footprints grow with the tile dims, so the worst tile of the smallest
    // tiling is the least any tiling needs.
    let m = layer_tiles(layer, tt, tc)
        .iter()
        .map(|t| memory_footprint(variant, &t.shape(layer), hw))
        .max_by_key(MemoryBreakdown::total)
        .unwrap_or_default();
    let limiting = [
        (Buffer::Input, m.input),
        (Buffer::Output, m.output),
        (Buffer::Weights, m.weights),
        (Buffer::Gather, m.gather),
    ]
    .into_iter()
    .max_by_key(|&(_, bytes)| bytes)
    .map(|(b, _)| b)
    .unwrap_or(Buffer::Input);
    Error::Infeasible { variant, limiting, required: m.total(), available: hw.l1_bytes }
}
