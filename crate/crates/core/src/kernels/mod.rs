//! The three convolution strategies.
//!
//! All variants share the same outer structure: the output time range is
//! split into contiguous per-worker chunks; each worker walks its chunk two
//! steps at a time, gathers the inputs of those steps (or not, for
//! No-im2col), and computes every output channel in 4x2 MatMul blocks with
//! requantization applied before the store. A trailing odd step runs as a
//! 4x1 block and the trailing `c_out % 4` channels as one narrow block; a
//! narrow block costs as much as a full one.

mod conv;
mod gather;
mod matmul;
mod memory;
mod pool;
mod trace;

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::QuantTensorTC;

pub use conv::{conv_window, run_conv, run_conv_with, OutputWindow};
pub use gather::{gather_im2col, gather_indirect, zero_interleave_weights, GatherBuffers, ZERO_ROW};
pub use matmul::{matmul_4x2, matmul_4x2_indirect};
pub use memory::{memory_footprint, MemoryBreakdown};
pub use pool::{avgpool_cycles, avgpool_window};
pub use trace::ExecutionTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelVariant {
    /// Reads the TC input in place; dilation is handled by zero-interleaved
    /// weights.
    NoIm2col,
    /// Copies each step's receptive field into a contiguous buffer.
    Im2col,
    /// Stores one input offset per tap and walks them in the MatMul.
    Indirect,
}

impl KernelVariant {
    /// In tie-break order.
    pub const ALL: [KernelVariant; 3] = [KernelVariant::NoIm2col, KernelVariant::Im2col, KernelVariant::Indirect];

    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::NoIm2col => "no-im2col",
            KernelVariant::Im2col => "im2col",
            KernelVariant::Indirect => "indirect",
        }
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-im2col" | "noim2col" => Ok(KernelVariant::NoIm2col),
            "im2col" => Ok(KernelVariant::Im2col),
            "indirect" => Ok(KernelVariant::Indirect),
            other => Err(Error::Config(alloc::format!("unknown kernel variant {other:?}"))),
        }
    }
}

/// A window of input steps resident in (simulated) L1: global steps
/// `origin..origin + rows`, TC layout.
#[derive(Debug, Clone, Copy)]
pub struct InputView<'a> {
    data: &'a [i8],
    channels: usize,
    origin: usize,
    rows: usize,
}

impl<'a> InputView<'a> {
    pub fn new(data: &'a [i8], channels: usize, origin: usize) -> Result<Self> {
        if channels == 0 || data.len() % channels != 0 {
            return Err(Error::Shape(alloc::format!(
                "input view of {} bytes is not a whole number of {channels}-channel steps",
                data.len()
            )));
        }
        Ok(Self { data, channels, origin, rows: data.len() / channels })
    }

    pub fn whole(x: &'a QuantTensorTC) -> Self {
        Self { data: x.data(), channels: x.channels(), origin: 0, rows: x.timesteps() }
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Global step `g`, which must be resident.
    #[inline]
    pub(crate) fn row(&self, g: usize) -> &'a [i8] {
        let local = g - self.origin;
        &self.data[local * self.channels..(local + 1) * self.channels]
    }

    #[inline]
    pub(crate) fn offset_of(&self, g: usize) -> usize {
        (g - self.origin) * self.channels
    }
}
