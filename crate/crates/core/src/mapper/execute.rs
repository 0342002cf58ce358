use alloc::format;
use alloc::vec::Vec;

use super::network::{pool_tile_memory, LayerKernel, LayerPlan, MappingPlan};
use super::tiling::{evaluate_tiling, layer_tiles, weight_transfer_bytes};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::hw::HardwareModel;
use crate::kernels::{avgpool_window, conv_window, ExecutionTrace, InputView, KernelVariant, OutputWindow};
use crate::layer::{ConvLayerSpec, Layer, NetworkSpec, PoolSpec};
use crate::tensor::QuantTensorTC;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferKind {
    /// L2 to L1.
    Input,
    /// L2 to L1.
    Weights,
    /// L1 to L2.
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transfer {
    pub layer: usize,
    pub kind: TransferKind,
    pub bytes: usize,
}

/// Every L2/L1 transfer issued by a plan, in issue order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DmaTrace {
    pub transfers: Vec<Transfer>,
}

impl DmaTrace {
    pub fn bytes(&self) -> usize {
        self.transfers.iter().map(|t| t.bytes).sum()
    }

    pub fn cycles(&self, hw: &HardwareModel) -> f64 {
        self.transfers.iter().map(|t| hw.transfer_cycles(t.bytes)).sum()
    }

    fn push(&mut self, layer: usize, kind: TransferKind, bytes: usize, hw: &HardwareModel) -> f64 {
        self.transfers.push(Transfer { layer, kind, bytes });
        hw.transfer_cycles(bytes)
    }
}

/// Events of one layer: kernel events plus its transfers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LayerRun {
    pub trace: ExecutionTrace,
    pub dma_cycles: f64,
}

impl LayerRun {
    pub fn event_cycles(&self) -> f64 {
        self.trace.total_cycles_event + self.dma_cycles
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanExecution {
    pub output: QuantTensorTC,
    /// Kernel events of the whole network.
    pub trace: ExecutionTrace,
    pub dma: DmaTrace,
    pub layers: Vec<LayerRun>,
}

impl PlanExecution {
    pub fn event_cycles(&self) -> f64 {
        self.layers.iter().map(LayerRun::event_cycles).sum()
    }
}

fn mismatch(i: usize, what: &str) -> Error {
    Error::Config(format!("plan does not match network at layer {i}: {what}"))
}

fn check_dims(i: usize, p: &LayerPlan, t_out: usize, c_out: usize) -> Result<()> {
    if p.tile_t_out == 0 || p.tile_t_out > t_out || p.tile_c_out == 0 || p.tile_c_out > c_out {
        return Err(mismatch(
            i,
            &format!("tile {}x{} outside the {t_out}x{c_out} output grid", p.tile_t_out, p.tile_c_out),
        ));
    }
    Ok(())
}

/// Runs `plan` tile by tile over a simulated L1/L2 hierarchy. The plan is
/// checked against `net` and `hw` first; any disagreement (layer kinds,
/// tile dims, L1 overflow) is a configuration error.
pub fn execute_plan<E: Executor>(
    exec: &E,
    net: &NetworkSpec,
    plan: &MappingPlan,
    x: &QuantTensorTC,
    hw: &HardwareModel,
    n_workers: usize,
) -> Result<PlanExecution> {
    hw.validate()?;
    let (c, t) = net.input_dims();
    if x.channels() != c || x.timesteps() != t {
        return Err(Error::Shape(format!(
            "network input is {c}x{t} (c x t), got {}x{}",
            x.channels(),
            x.timesteps()
        )));
    }
    if plan.layers.len() != net.layers().len() {
        return Err(Error::Config(format!(
            "plan has {} layers, network has {}",
            plan.layers.len(),
            net.layers().len()
        )));
    }
    let mut cur = x.clone();
    let mut dma = DmaTrace::default();
    let mut trace = ExecutionTrace::default();
    let mut layers = Vec::with_capacity(plan.layers.len());
    for (i, (layer, p)) in net.layers().iter().zip(&plan.layers).enumerate() {
        if p.index != i {
            return Err(mismatch(i, &format!("entry carries index {}", p.index)));
        }
        let (next, run) = match (layer, p.kernel) {
            (Layer::Conv1D(spec), LayerKernel::Conv(v)) => run_conv_layer(exec, i, spec, v, p, &cur, hw, n_workers, &mut dma)?,
            (Layer::Linear(spec), LayerKernel::Linear) => {
                let flat = QuantTensorTC::new(spec.in_features, 1, cur.data().to_vec(), cur.scale())?;
                run_conv_layer(exec, i, &spec.as_conv(), KernelVariant::NoIm2col, p, &flat, hw, n_workers, &mut dma)?
            }
            (Layer::AvgPool1D(pool), LayerKernel::AvgPool) => run_pool_layer(exec, i, *pool, p, &cur, hw, n_workers, &mut dma)?,
            (_, k) => return Err(mismatch(i, &format!("kernel {k} does not fit the layer type"))),
        };
        trace += run.trace;
        layers.push(run);
        cur = next;
    }
    Ok(PlanExecution { output: cur, trace, dma, layers })
}

#[allow(clippy::too_many_arguments)]
fn run_conv_layer<E: Executor>(
    exec: &E,
    i: usize,
    spec: &ConvLayerSpec,
    variant: KernelVariant,
    p: &LayerPlan,
    x: &QuantTensorTC,
    hw: &HardwareModel,
    n_workers: usize,
    dma: &mut DmaTrace,
) -> Result<(QuantTensorTC, LayerRun)> {
    let shape = spec.shape();
    check_dims(i, p, shape.t_out, shape.c_out)?;
    if evaluate_tiling(&shape, variant, hw, p.tile_t_out, p.tile_c_out).is_none() {
        return Err(mismatch(
            i,
            &format!("{variant} tiles of {}x{} overflow L1 ({} B)", p.tile_t_out, p.tile_c_out, hw.l1_bytes),
        ));
    }
    let mut out = alloc::vec![0i8; shape.t_out * shape.c_out];
    let mut run = LayerRun::default();
    let mut loaded_c = None;
    for tile in layer_tiles(&shape, p.tile_t_out, p.tile_c_out) {
        if loaded_c != Some(tile.c_start) {
            let bytes = weight_transfer_bytes(variant, &shape, tile.c_len);
            run.dma_cycles += dma.push(i, TransferKind::Weights, bytes, hw);
            loaded_c = Some(tile.c_start);
        }
        let rows = &x.data()[tile.in_start * shape.c_in..(tile.in_start + tile.in_len) * shape.c_in];
        let l1_input = rows.to_vec();
        run.dma_cycles += dma.push(i, TransferKind::Input, l1_input.len(), hw);
        let win = OutputWindow { t_start: tile.t_start, t_len: tile.t_len, c_start: tile.c_start, c_len: tile.c_len };
        let view = InputView::new(&l1_input, shape.c_in, tile.in_start)?;
        let (y, tr) = conv_window(exec, variant, view, spec, win, hw, n_workers)?;
        run.trace += tr;
        for (r, row) in y.chunks_exact(tile.c_len).enumerate() {
            let o = (tile.t_start + r) * shape.c_out + tile.c_start;
            out[o..o + tile.c_len].copy_from_slice(row);
        }
        run.dma_cycles += dma.push(i, TransferKind::Output, y.len(), hw);
    }
    Ok((QuantTensorTC::new(shape.c_out, shape.t_out, out, 1.0)?, run))
}

#[allow(clippy::too_many_arguments)]
fn run_pool_layer<E: Executor>(
    exec: &E,
    i: usize,
    pool: PoolSpec,
    p: &LayerPlan,
    x: &QuantTensorTC,
    hw: &HardwareModel,
    n_workers: usize,
    dma: &mut DmaTrace,
) -> Result<(QuantTensorTC, LayerRun)> {
    let c = x.channels();
    let t_out = pool.t_out(x.timesteps())?;
    check_dims(i, p, t_out, c)?;
    if p.tile_c_out != c {
        return Err(mismatch(i, "pooling tiles span all channels"));
    }
    if pool_tile_memory(c, pool, p.tile_t_out).total() > hw.l1_bytes {
        return Err(mismatch(i, &format!("pooling tile of {} steps overflows L1", p.tile_t_out)));
    }
    let mut out = Vec::with_capacity(t_out * c);
    let mut run = LayerRun::default();
    for t0 in (0..t_out).step_by(p.tile_t_out) {
        let len = p.tile_t_out.min(t_out - t0);
        let first = t0 * pool.stride;
        let rows = (len - 1) * pool.stride + pool.window;
        let l1_input = x.data()[first * c..(first + rows) * c].to_vec();
        run.dma_cycles += dma.push(i, TransferKind::Input, l1_input.len(), hw);
        let (y, tr) = avgpool_window(exec, InputView::new(&l1_input, c, first)?, pool, t0, len, hw, n_workers)?;
        run.trace += tr;
        run.dma_cycles += dma.push(i, TransferKind::Output, y.len(), hw);
        out.extend_from_slice(&y);
    }
    Ok((QuantTensorTC::new(c, t_out, out, x.scale())?, run))
}

