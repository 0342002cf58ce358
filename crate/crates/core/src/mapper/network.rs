use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::tiling::{tile_search, TilePlan};
use super::Objective;
use crate::error::{Error, Result};
use crate::hw::HardwareModel;
use crate::kernels::{avgpool_cycles, KernelVariant, MemoryBreakdown};
use crate::layer::{ConvShape, Layer, NetworkSpec, PoolSpec};

/// Picks the variant whose best tiling has the fewest modeled cycles.
/// Only variants in `allowed` are tried; ties keep `KernelVariant::ALL` order.
pub fn select_kernel(
    layer: &ConvShape,
    hw: &HardwareModel,
    objective: Objective,
    allowed: &[KernelVariant],
) -> Result<TilePlan> {
    let mut best: Option<TilePlan> = None;
    let mut reasons = Vec::new();
    for v in KernelVariant::ALL.into_iter().filter(|v| allowed.contains(v)) {
        match tile_search(layer, v, hw, objective) {
            Ok(p) => {
                if best.as_ref().map_or(true, |b| p.predicted_cycles < b.predicted_cycles) {
                    best = Some(p);
                }
            }
            Err(e @ Error::Infeasible { .. }) => reasons.push(format!("{e}")),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| Error::Oom {
        layers: Vec::new(),
        reason: if reasons.is_empty() { "no kernel variant allowed".into() } else { reasons.join("; ") },
    })
}

/// How a layer is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKernel {
    Conv(KernelVariant),
    /// Dense layer, run as a 1x1 convolution over one step.
    Linear,
    AvgPool,
}

impl LayerKernel {
    pub fn name(self) -> &'static str {
        match self {
            LayerKernel::Conv(v) => v.name(),
            LayerKernel::Linear => "linear",
            LayerKernel::AvgPool => "avgpool",
        }
    }
}

impl fmt::Display for LayerKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayerKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(LayerKernel::Linear),
            "avgpool" => Ok(LayerKernel::AvgPool),
            other => other.parse().map(LayerKernel::Conv),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerPlan {
    pub index: usize,
    pub kernel: LayerKernel,
    pub tile_t_out: usize,
    pub tile_c_out: usize,
    pub predicted_cycles: f64,
    /// Footprint of the largest tile.
    pub l1_bytes_used: MemoryBreakdown,
}

impl LayerPlan {
    fn from_tiles(index: usize, kernel: LayerKernel, p: &TilePlan) -> Self {
        Self {
            index,
            kernel,
            tile_t_out: p.tile_t_out,
            tile_c_out: p.tile_c_out,
            predicted_cycles: p.predicted_cycles,
            l1_bytes_used: p.memory,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingPlan {
    pub layers: Vec<LayerPlan>,
    pub total_predicted_cycles: f64,
}

impl MappingPlan {
    pub fn new(layers: Vec<LayerPlan>) -> Self {
        let total_predicted_cycles = layers.iter().map(|l| l.predicted_cycles).sum();
        Self { layers, total_predicted_cycles }
    }
}

/// L1 bytes for pooling output steps `t0..t0 + tt`.
pub(crate) fn pool_tile_memory(channels: usize, pool: PoolSpec, tt: usize) -> MemoryBreakdown {
    MemoryBreakdown {
        input: ((tt - 1) * pool.stride + pool.window) * channels,
        output: tt * channels,
        weights: 0,
        gather: 0,
    }
}

/// Pooling runs untiled when it fits, else on the longest time tile that does.
fn plan_pool(index: usize, channels: usize, t_in: usize, pool: PoolSpec, hw: &HardwareModel) -> Result<LayerPlan> {
    let t_out = pool.t_out(t_in)?;
    let tt = (1..=t_out)
        .rev()
        .find(|&tt| pool_tile_memory(channels, pool, tt).total() <= hw.l1_bytes)
        .ok_or_else(|| {
            let m = pool_tile_memory(channels, pool, 1);
            Error::Oom {
                layers: alloc::vec![index],
                reason: format!(
                    "pooling needs {} B of L1 (input), {} B available",
                    m.total(),
                    hw.l1_bytes
                ),
            }
        })?;
    let mut cycles = 0.0;
    for t0 in (0..t_out).step_by(tt) {
        let len = tt.min(t_out - t0);
        let m = pool_tile_memory(channels, pool, len);
        cycles += avgpool_cycles(channels, pool, len, hw)
            + hw.transfer_cycles(m.input)
            + hw.transfer_cycles(m.output);
    }
    Ok(LayerPlan {
        index,
        kernel: LayerKernel::AvgPool,
        tile_t_out: tt,
        tile_c_out: channels,
        predicted_cycles: cycles,
        l1_bytes_used: pool_tile_memory(channels, pool, tt),
    })
}

/// Plans every layer of `net`. Convolutions get the best variant under
/// `objective` (or `force`, if given); linear and pooling layers use their
/// fixed mappings. Layers that cannot be mapped are collected into one
/// [`Error::Oom`].
pub fn plan_network(
    net: &NetworkSpec,
    hw: &HardwareModel,
    objective: Objective,
    force: Option<KernelVariant>,
) -> Result<MappingPlan> {
    hw.validate()?;
    let allowed: Vec<KernelVariant> = match force {
        Some(v) => alloc::vec![v],
        None => KernelVariant::ALL.to_vec(),
    };
    let mut plans = Vec::new();
    let mut failed = Vec::new();
    let mut reasons: Vec<String> = Vec::new();
    for (i, (layer, (din, dout))) in net.layers().iter().zip(net.layer_dims()?).enumerate() {
        let l2 = layer.weight_bytes() + din.0 * din.1 + dout.0 * dout.1;
        if l2 > hw.l2_bytes {
            failed.push(i);
            reasons.push(format!("layer {i}: needs {l2} B of L2, {} B available", hw.l2_bytes));
            continue;
        }
        let planned = match layer {
            Layer::Conv1D(spec) => select_kernel(&spec.shape(), hw, objective, &allowed)
                .map(|p| LayerPlan::from_tiles(i, LayerKernel::Conv(p.variant), &p)),
            Layer::Linear(spec) => tile_search(&spec.as_conv().shape(), KernelVariant::NoIm2col, hw, objective)
                .map(|p| LayerPlan::from_tiles(i, LayerKernel::Linear, &p)),
            Layer::AvgPool1D(pool) => plan_pool(i, din.0, din.1, *pool, hw),
        };
        match planned {
            Ok(p) => plans.push(p),
            Err(Error::Oom { reason, .. }) => {
                failed.push(i);
                reasons.push(format!("layer {i}: {reason}"));
            }
            Err(e @ Error::Infeasible { .. }) => {
                failed.push(i);
                reasons.push(format!("layer {i}: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    if !failed.is_empty() {
        return Err(Error::Oom { layers: failed, reason: reasons.join("; ") });
    }
    Ok(MappingPlan::new(plans))
}

