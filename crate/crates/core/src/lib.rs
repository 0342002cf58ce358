//! int8 dilated causal 1D convolution for TCN inference on scratchpad
//! memory hierarchies.
//!
//! The crate is `no_std` (with `alloc`). It contains:
//!
//! - [`tensor`] and [`layer`]: time-major (TC) feature maps, weights,
//!   requantization parameters and network descriptions;
//! - [`oracle`]: naive reference implementations used as ground truth;
//! - [`kernels`]: the No-im2col, Im2col and Indirect convolution
//!   strategies, with a 4x2 MatMul micro-kernel, fused requantization,
//!   time-wise partitioning across workers and event instrumentation;
//! - [`costmodel`]: closed-form cycle models for each strategy;
//! - [`mapper`]: L1 tile search, kernel selection, network planning and a
//!   tiled executor over a simulated L1/L2 hierarchy;
//! - [`calibrate`]: lattice search for the cost constants.
//!
//! File formats, the command line and thread-based execution live in the
//! `tcn-tools` crate.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod calibrate;
pub mod costmodel;
pub mod error;
pub mod exec;
pub mod hw;
pub mod kernels;
pub mod layer;
pub mod mapper;
pub mod oracle;
pub mod tensor;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use hw::HardwareModel;
pub use kernels::{ExecutionTrace, KernelVariant};
pub use layer::{ConvLayerSpec, ConvShape, ConvWeights, Layer, LinearSpec, NetworkSpec, PoolSpec, RequantParams};
pub use tensor::{tc_offset, QuantTensorTC};
