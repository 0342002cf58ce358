//! Closed-form cycle models of the three kernels.
//!
//! For a convolution on `n_cores` cores the most loaded core handles
//! `ceil(t_out / n_cores)` output steps, in `core_iter` outer iterations
//! of two steps (the last one possibly single). Each iteration costs
//!
//! ```text
//! epsilon + gather + mm_iter * mm
//! ```
//!
//! with `mm_iter = ceil(c_out / 4)` MatMul blocks. For im2col,
//! `gather = max(2*k*alpha, 2*k*c_in*beta)` and
//! `mm = gamma + delta * ceil(k*c_in/4)`. No-im2col skips the gather and
//! pays for the zero-interleaved filter in `mm`; indirect writes `2*k`
//! pointers and walks `k` segments per block, each with an extra
//! `gamma_prime` of loop overhead. The same events, weighted by the same
//! constants, are what [`crate::kernels::ExecutionTrace`] accumulates, so
//! model and trace agree whenever the kernel runs on `n_cores` workers.

use alloc::vec::Vec;

use crate::hw::HardwareModel;
use crate::kernels::KernelVariant;
use crate::layer::ConvShape;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclePrediction {
    /// Gather cycles of a full two-step iteration.
    pub gather_cyc: f64,
    /// Cycles of one MatMul block.
    pub mm_cyc: f64,
    pub total_cyc: f64,
    /// Outer iterations of the most loaded core.
    pub core_iter: usize,
    /// MatMul blocks per iteration.
    pub mm_iter: usize,
}

/// Outer iterations run by the most loaded core.
pub fn core_iter(t_out: usize, n_cores: usize) -> usize {
    t_out.div_ceil(n_cores).div_ceil(2)
}

/// MatMul blocks per outer iteration.
pub fn mm_iter(c_out: usize) -> usize {
    c_out.div_ceil(4)
}

fn gather_for_steps(variant: KernelVariant, shape: &ConvShape, hw: &HardwareModel, steps: usize) -> f64 {
    let taps = (steps * shape.k) as f64;
    match variant {
        KernelVariant::NoIm2col => 0.0,
        KernelVariant::Im2col => (taps * hw.alpha).max(taps * shape.c_in as f64 * hw.beta),
        KernelVariant::Indirect => taps * hw.beta,
    }
}

/// Gather cycles of one two-step iteration.
pub fn gather_cycles(variant: KernelVariant, shape: &ConvShape, hw: &HardwareModel) -> f64 {
    gather_for_steps(variant, shape, hw, 2)
}

/// Cycles of one MatMul block.
pub fn mm_cycles(variant: KernelVariant, shape: &ConvShape, hw: &HardwareModel) -> f64 {
    match variant {
        KernelVariant::NoIm2col => hw.gamma + hw.delta * (shape.k_dilated() * shape.c_in).div_ceil(4) as f64,
        KernelVariant::Im2col => hw.gamma + hw.delta * (shape.k * shape.c_in).div_ceil(4) as f64,
        KernelVariant::Indirect => {
            let k = shape.k as f64;
            hw.gamma + k * hw.gamma_prime + hw.delta * (shape.k * shape.c_in.div_ceil(4)) as f64
        }
    }
}

pub fn layer_cycles(variant: KernelVariant, shape: &ConvShape, hw: &HardwareModel) -> CyclePrediction {
    let steps = shape.t_out.div_ceil(hw.n_cores);
    let pairs = steps / 2;
    let single = steps % 2;
    let blocks = mm_iter(shape.c_out);
    let mm = mm_cycles(variant, shape, hw);
    let body = blocks as f64 * mm;
    let full = hw.epsilon + gather_for_steps(variant, shape, hw, 2) + body;
    let half = hw.epsilon + gather_for_steps(variant, shape, hw, 1) + body;
    CyclePrediction {
        gather_cyc: gather_cycles(variant, shape, hw),
        mm_cyc: mm,
        total_cyc: pairs as f64 * full + single as f64 * half,
        core_iter: pairs + single,
        mm_iter: blocks,
    }
}

/// Variants sorted by predicted cycles; ties keep the order
/// No-im2col, Im2col, Indirect.
pub fn rank_variants(shape: &ConvShape, hw: &HardwareModel) -> Vec<(KernelVariant, f64)> {
    let mut ranked: Vec<(KernelVariant, f64)> =
        KernelVariant::ALL.iter().map(|&v| (v, layer_cycles(v, shape, hw).total_cyc)).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    ranked
}
