use super::KernelVariant;
use crate::hw::HardwareModel;
use crate::layer::ConvShape;

/// Bytes of L1 needed by one kernel invocation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MemoryBreakdown {
    pub input: usize,
    pub output: usize,
    pub weights: usize,
    pub gather: usize,
}

impl MemoryBreakdown {
    pub fn total(&self) -> usize {
        self.input + self.output + self.weights + self.gather
    }
}

/// L1 footprint of running `variant` on `shape` (a layer or a tile; the
/// input term uses `shape.t_in` resident steps).
///
/// Gather buffers are allocated twice per core: `k * c_in` bytes each for
/// im2col, `k` entries of `offset_bytes` for indirect. No-im2col stores
/// zero-interleaved weights when `d > 1`.
pub fn memory_footprint(variant: KernelVariant, shape: &ConvShape, hw: &HardwareModel) -> MemoryBreakdown {
    let taps = match variant {
        KernelVariant::NoIm2col => shape.k_dilated(),
        _ => shape.k,
    };
    let gather = match variant {
        KernelVariant::NoIm2col => 0,
        KernelVariant::Im2col => 2 * hw.n_cores * shape.k * shape.c_in,
        KernelVariant::Indirect => 2 * hw.n_cores * shape.k * hw.offset_bytes,
    };
    MemoryBreakdown {
        input: shape.t_in * shape.c_in,
        output: shape.t_out * shape.c_out,
        weights: shape.c_out * taps * shape.c_in,
        gather,
    }
}
