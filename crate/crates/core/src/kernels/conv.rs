use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::gather::{fill_im2col, fill_indirect, ZERO_ROW};
use super::matmul::{direct_block, segmented_block};
use super::trace::{ExecutionTrace, IterationEvents};
use super::{InputView, KernelVariant};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::hw::HardwareModel;
use crate::layer::ConvLayerSpec;
use crate::tensor::QuantTensorTC;

/// Output steps `t_start..t_start + t_len` and channels
/// `c_start..c_start + c_len` of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputWindow {
    pub t_start: usize,
    pub t_len: usize,
    pub c_start: usize,
    pub c_len: usize,
}

impl OutputWindow {
    pub fn full(spec: &ConvLayerSpec) -> Self {
        Self { t_start: 0, t_len: spec.t_out(), c_start: 0, c_len: spec.c_out }
    }
}

/// Filters of the window's channels in gather-slot order (ascending input
/// time), zero-interleaved for No-im2col.
struct PackedFilters {
    data: Vec<i8>,
    row_len: usize,
}

impl PackedFilters {
    fn new(variant: KernelVariant, spec: &ConvLayerSpec, c_start: usize, c_len: usize) -> Self {
        let c_in = spec.c_in;
        let (taps, stretch) = match variant {
            KernelVariant::NoIm2col => ((spec.k - 1) * spec.d + 1, spec.d),
            _ => (spec.k, 1),
        };
        let row_len = taps * c_in;
        let mut data = vec![0i8; c_len * row_len];
        for (mi, m) in (c_start..c_start + c_len).enumerate() {
            let src = spec.weights.filter(m);
            for p in 0..taps {
                let tap = taps - 1 - p;
                if tap % stretch != 0 {
                    continue;
                }
                let i = tap / stretch;
                let dst = mi * row_len + p * c_in;
                data[dst..dst + c_in].copy_from_slice(&src[i * c_in..(i + 1) * c_in]);
            }
        }
        Self { data, row_len }
    }

    #[inline]
    fn row(&self, m: usize) -> &[i8] {
        &self.data[m * self.row_len..(m + 1) * self.row_len]
    }
}

/// Column operands of one outer iteration.
enum Columns<'a> {
    Direct { cols: [&'a [i8]; 2], skip: [usize; 2] },
    Segments { segs: [Vec<&'a [i8]>; 2] },
}

struct Engine<'a> {
    variant: KernelVariant,
    x: InputView<'a>,
    spec: &'a ConvLayerSpec,
    win: OutputWindow,
    filters: PackedFilters,
    zero_row: Vec<i8>,
    hw: &'a HardwareModel,
}

impl<'a> Engine<'a> {
    fn steps_per_block(&self) -> (u64, u64) {
        let c_in = self.spec.c_in;
        match self.variant {
            KernelVariant::Indirect => ((self.spec.k * c_in.div_ceil(4)) as u64, self.spec.k as u64),
            _ => (self.filters.row_len.div_ceil(4) as u64, 0),
        }
    }

    fn block<const R: usize, const N: usize>(&self, m: usize, cols: &Columns<'_>) -> [[i32; N]; R] {
        let rows: [&[i8]; R] = core::array::from_fn(|r| self.filters.row(m + r));
        match cols {
            Columns::Direct { cols, skip } => {
                direct_block(rows, core::array::from_fn(|j| cols[j]), core::array::from_fn(|j| skip[j]))
            }
            Columns::Segments { segs } => {
                segmented_block(rows, core::array::from_fn(|j| segs[j].as_slice()), self.spec.c_in)
            }
        }
    }

    fn emit<const R: usize, const N: usize>(
        &self,
        m: usize,
        cols: &Columns<'_>,
        out: &mut [i8],
        local_t: usize,
        ev: &mut IterationEvents,
    ) {
        let acc = self.block::<R, N>(m, cols);
        let (steps, segments) = self.steps_per_block();
        ev.blocks += 1;
        ev.steps += steps;
        ev.segments += segments;
        ev.macgroups += (R * N) as u64 * steps;
        let c_len = self.win.c_len;
        for (r, row) in acc.iter().enumerate() {
            let ch = self.win.c_start + m + r;
            for (j, &a) in row.iter().enumerate() {
                out[(local_t + j) * c_len + m + r] = self.spec.requant.apply(ch, a);
            }
        }
    }

    fn columns<'b>(
        &'b self,
        anchors: [usize; 2],
        steps: usize,
        bufs: &'b mut [Vec<i8>; 2],
        entries: &mut [Vec<usize>; 2],
        ev: &mut IterationEvents,
    ) -> Columns<'b> {
        let spec = self.spec;
        let c = spec.c_in;
        match self.variant {
            KernelVariant::NoIm2col => {
                let reach = (spec.k - 1) * spec.d;
                let mut cols: [&[i8]; 2] = [&[], &[]];
                let mut skip = [0usize; 2];
                for j in 0..steps {
                    let a = anchors[j];
                    let lo = a.saturating_sub(reach);
                    cols[j] = &self.x.data[self.x.offset_of(lo)..self.x.offset_of(a + 1)];
                    skip[j] = (reach - (a - lo)) * c;
                }
                Columns::Direct { cols, skip }
            }
            KernelVariant::Im2col => {
                for j in 0..steps {
                    fill_im2col(&self.x, spec.k, spec.d, anchors[j], &mut bufs[j], ev);
                }
                let [b0, b1] = bufs;
                Columns::Direct { cols: [b0.as_slice(), b1.as_slice()], skip: [0, 0] }
            }
            KernelVariant::Indirect => {
                for j in 0..steps {
                    fill_indirect(&self.x, spec.k, spec.d, anchors[j], &mut entries[j], ev);
                }
                let resolve = |e: &Vec<usize>| -> Vec<&'b [i8]> {
                    e.iter()
                        .map(|&off| if off == ZERO_ROW { self.zero_row.as_slice() } else { &self.x.data[off..off + c] })
                        .collect()
                };
                Columns::Segments { segs: [resolve(&entries[0]), resolve(&entries[1])] }
            }
        }
    }

    /// Computes output steps `lo..hi` of the window (window-relative).
    fn run_chunk(&self, lo: usize, hi: usize) -> (Vec<i8>, ExecutionTrace) {
        let c_len = self.win.c_len;
        let mut out = vec![0i8; (hi - lo) * c_len];
        let mut trace = ExecutionTrace::default();
        let buf_len = self.spec.k * self.spec.c_in;
        let mut bufs = [vec![0i8; buf_len], vec![0i8; buf_len]];
        let mut entries = [vec![ZERO_ROW; self.spec.k], vec![ZERO_ROW; self.spec.k]];
        let mut t = lo;
        while t < hi {
            let steps = (hi - t).min(2);
            let g = self.win.t_start + t;
            let anchors = [g * self.spec.stride, (g + 1) * self.spec.stride];
            let mut ev = IterationEvents::default();
            let cols = self.columns(anchors, steps, &mut bufs, &mut entries, &mut ev);
            let local_t = t - lo;
            let mut m = 0;
            while m < c_len {
                let rows = (c_len - m).min(4);
                match (rows, steps) {
                    (4, 2) => self.emit::<4, 2>(m, &cols, &mut out, local_t, &mut ev),
                    (4, _) => self.emit::<4, 1>(m, &cols, &mut out, local_t, &mut ev),
                    (3, 2) => self.emit::<3, 2>(m, &cols, &mut out, local_t, &mut ev),
                    (3, _) => self.emit::<3, 1>(m, &cols, &mut out, local_t, &mut ev),
                    (2, 2) => self.emit::<2, 2>(m, &cols, &mut out, local_t, &mut ev),
                    (2, _) => self.emit::<2, 1>(m, &cols, &mut out, local_t, &mut ev),
                    (_, 2) => self.emit::<1, 2>(m, &cols, &mut out, local_t, &mut ev),
                    (_, _) => self.emit::<1, 1>(m, &cols, &mut out, local_t, &mut ev),
                }
                m += rows;
            }
            trace.close_iteration(&ev, self.hw);
            t += steps;
        }
        (out, trace)
    }
}

fn check_window(variant: KernelVariant, x: &InputView<'_>, spec: &ConvLayerSpec, win: &OutputWindow) -> Result<()> {
    spec.validate()?;
    if x.channels != spec.c_in {
        return Err(Error::Shape(format!("input has {} channels, layer expects {}", x.channels, spec.c_in)));
    }
    if win.t_len == 0 || win.c_len == 0 || win.t_start + win.t_len > spec.t_out() || win.c_start + win.c_len > spec.c_out {
        return Err(Error::Config(format!(
            "output window t={}+{} c={}+{} exceeds layer output {}x{} (t x c)",
            win.t_start,
            win.t_len,
            win.c_start,
            win.c_len,
            spec.t_out(),
            spec.c_out
        )));
    }
    let first = (win.t_start * spec.stride).saturating_sub((spec.k - 1) * spec.d);
    let last = (win.t_start + win.t_len - 1) * spec.stride;
    if first < x.origin || last >= x.origin + x.rows {
        return Err(Error::Config(format!(
            "{variant}: window needs input steps {first}..={last}, only {}..{} are resident",
            x.origin,
            x.origin + x.rows
        )));
    }
    Ok(())
}

/// Computes one output window of `spec` from the resident input `x`,
/// splitting its time range over `n_workers` and running the chunks on
/// `exec`. Returns the window in TC layout (`t_len x c_len`).
#[allow(clippy::too_many_arguments)]
pub fn conv_window<E: Executor>(
    exec: &E,
    variant: KernelVariant,
    x: InputView<'_>,
    spec: &ConvLayerSpec,
    win: OutputWindow,
    hw: &HardwareModel,
    n_workers: usize,
) -> Result<(Vec<i8>, ExecutionTrace)> {
    if n_workers == 0 || n_workers > hw.n_cores {
        return Err(Error::Config(format!("n_workers must be in 1..={}, got {n_workers}", hw.n_cores)));
    }
    check_window(variant, &x, spec, &win)?;
    let engine = Engine {
        variant,
        x,
        spec,
        win,
        filters: PackedFilters::new(variant, spec, win.c_start, win.c_len),
        zero_row: vec![0; spec.c_in],
        hw,
    };
    let chunk = win.t_len.div_ceil(n_workers);
    let parts = exec.map(n_workers, |w| {
        let lo = (w * chunk).min(win.t_len);
        let hi = ((w + 1) * chunk).min(win.t_len);
        engine.run_chunk(lo, hi)
    });
    let mut out = Vec::with_capacity(win.t_len * win.c_len);
    let mut traces = Vec::with_capacity(parts.len());
    for (o, t) in parts {
        out.extend_from_slice(&o);
        traces.push(t);
    }
    Ok((out, ExecutionTrace::join_parallel(traces)))
}

/// Runs a whole layer with `variant` on `n_workers` simulated cores.
pub fn run_conv(
    variant: KernelVariant,
    x: &QuantTensorTC,
    spec: &ConvLayerSpec,
    hw: &HardwareModel,
    n_workers: usize,
) -> Result<(QuantTensorTC, ExecutionTrace)> {
    run_conv_with(&Sequential, variant, x, spec, hw, n_workers)
}

pub fn run_conv_with<E: Executor>(
    exec: &E,
    variant: KernelVariant,
    x: &QuantTensorTC,
    spec: &ConvLayerSpec,
    hw: &HardwareModel,
    n_workers: usize,
) -> Result<(QuantTensorTC, ExecutionTrace)> {
    if x.channels() != spec.c_in || x.timesteps() != spec.t_in {
        return Err(Error::Shape(format!(
            "input is {}x{} (c x t), layer expects {}x{}",
            x.channels(),
            x.timesteps(),
            spec.c_in,
            spec.t_in
        )));
    }
    let (out, trace) = conv_window(exec, variant, InputView::whole(x), spec, OutputWindow::full(spec), hw, n_workers)?;
    Ok((QuantTensorTC::new(spec.c_out, spec.t_out(), out, 1.0)?, trace))
}
