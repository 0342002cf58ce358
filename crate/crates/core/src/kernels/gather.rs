//! Input gathering: im2col copies and indirect offset buffers.
//!
//! Both buffers list the taps of one output step in ascending time order:
//! slot `p` holds tap `k - 1 - p`, i.e. input step `t*stride - d*(k-1-p)`.
//! Packed filters use the same slot order, so each inner product is one
//! contiguous scan.

use alloc::vec;
use alloc::vec::Vec;

use super::trace::{ExecutionTrace, IterationEvents};
use super::InputView;
use crate::error::Result;
use crate::hw::HardwareModel;
use crate::layer::{ConvLayerSpec, ConvWeights};
use crate::tensor::QuantTensorTC;

/// Indirect entry pointing at the shared all-zero row.
pub const ZERO_ROW: usize = usize::MAX;

/// Expands a dilated filter to the equivalent dense filter with
/// `(k - 1) * d + 1` taps; tap `j` is original tap `j / d` when `d`
/// divides `j` and zero otherwise.
pub fn zero_interleave_weights(w: &ConvWeights, d: usize) -> ConvWeights {
    if d <= 1 || w.k() == 1 {
        return w.clone();
    }
    let k_eff = (w.k() - 1) * d + 1;
    let c_in = w.c_in();
    let mut data = vec![0i8; w.c_out() * k_eff * c_in];
    for m in 0..w.c_out() {
        for i in 0..w.k() {
            let dst = (m * k_eff + i * d) * c_in;
            let src = (m * w.k() + i) * c_in;
            data[dst..dst + c_in].copy_from_slice(&w.data()[src..src + c_in]);
        }
    }
    ConvWeights::new(w.c_out(), k_eff, c_in, data).expect("interleaved dimensions are consistent")
}

/// Gather buffers of one outer iteration; `steps` is 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GatherBuffers {
    NoIm2col,
    Im2col { bufs: [Vec<i8>; 2], steps: usize },
    Indirect { entries: [Vec<usize>; 2], steps: usize },
}

pub(crate) fn fill_im2col(
    x: &InputView<'_>,
    k: usize,
    d: usize,
    anchor: usize,
    buf: &mut [i8],
    ev: &mut IterationEvents,
) {
    let c = x.channels;
    for p in 0..k {
        let back = d * (k - 1 - p);
        let dst = &mut buf[p * c..(p + 1) * c];
        match anchor.checked_sub(back) {
            Some(g) => dst.copy_from_slice(x.row(g)),
            None => dst.fill(0),
        }
    }
    ev.dma_invocations += k as u64;
    ev.dma_bytes += (k * c) as u64;
}

pub(crate) fn fill_indirect(
    x: &InputView<'_>,
    k: usize,
    d: usize,
    anchor: usize,
    entries: &mut [usize],
    ev: &mut IterationEvents,
) {
    for (p, e) in entries.iter_mut().enumerate().take(k) {
        let back = d * (k - 1 - p);
        *e = match anchor.checked_sub(back) {
            Some(g) => x.offset_of(g),
            None => ZERO_ROW,
        };
    }
    ev.offset_entries += k as u64;
}

fn pair_anchors(spec: &ConvLayerSpec, t_pair: (usize, Option<usize>)) -> ([usize; 2], usize) {
    let a0 = t_pair.0 * spec.stride;
    match t_pair.1 {
        Some(t1) => ([a0, t1 * spec.stride], 2),
        None => ([a0, 0], 1),
    }
}

/// Builds the two im2col buffers for output steps `t_pair` (the second step
/// is absent for a trailing odd step).
pub fn gather_im2col(
    x: &QuantTensorTC,
    spec: &ConvLayerSpec,
    t_pair: (usize, Option<usize>),
    hw: &HardwareModel,
    trace: &mut ExecutionTrace,
) -> Result<GatherBuffers> {
    let view = InputView::whole(x);
    let (anchors, steps) = pair_anchors(spec, t_pair);
    let len = spec.k * spec.c_in;
    let mut bufs = [vec![0i8; len], vec![0i8; len]];
    let mut ev = IterationEvents::default();
    for j in 0..steps {
        fill_im2col(&view, spec.k, spec.d, anchors[j], &mut bufs[j], &mut ev);
    }
    trace.record_gather(&ev, hw);
    Ok(GatherBuffers::Im2col { bufs, steps })
}

/// Builds the two indirect buffers (flat offsets of the first channel of
/// each tap's input step) for output steps `t_pair`.
pub fn gather_indirect(
    x: &QuantTensorTC,
    spec: &ConvLayerSpec,
    t_pair: (usize, Option<usize>),
    hw: &HardwareModel,
    trace: &mut ExecutionTrace,
) -> Result<GatherBuffers> {
    let view = InputView::whole(x);
    let (anchors, steps) = pair_anchors(spec, t_pair);
    let mut entries = [vec![ZERO_ROW; spec.k], vec![ZERO_ROW; spec.k]];
    let mut ev = IterationEvents::default();
    for j in 0..steps {
        fill_indirect(&view, spec.k, spec.d, anchors[j], &mut entries[j], &mut ev);
    }
    trace.record_gather(&ev, hw);
    Ok(GatherBuffers::Indirect { entries, steps })
}
