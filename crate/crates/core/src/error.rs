use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::kernels::KernelVariant;

pub type Result<T> = core::result::Result<T, Error>;

/// L1 buffer classes, used to report which one makes a tile infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Buffer {
    Input,
    Output,
    Weights,
    Gather,
}

impl Buffer {
    pub fn name(self) -> &'static str {
        match self {
            Buffer::Input => "input",
            Buffer::Output => "output",
            Buffer::Weights => "weights",
            Buffer::Gather => "gather",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An index fell outside its dimension.
    OutOfBounds { what: &'static str, index: usize, len: usize },
    /// Tensor or layer dimensions disagree.
    Shape(String),
    /// Inconsistent kernel, plan or hardware configuration.
    Config(String),
    /// Not even the smallest tile of `variant` fits in L1.
    Infeasible {
        variant: KernelVariant,
        limiting: Buffer,
        required: usize,
        available: usize,
    },
    /// One or more layers cannot be mapped on the memory hierarchy.
    Oom { layers: Vec<usize>, reason: String },
    /// No lattice point reproduces the calibration targets.
    Calibration(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutOfBounds { what, index, len } => {
                write!(f, "{what} index {index} out of range 0..{len}")
            }
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Infeasible { variant, limiting, required, available } => write!(
                f,
                "{variant}: smallest tile needs {required} B of L1 but only {available} B are available \
                 (largest buffer: {})",
                limiting.name()
            ),
            Error::Calibration(msg) => write!(f, "calibration failed: {msg}"),
            Error::Oom { layers, reason } if layers.is_empty() => write!(f, "OOM: {reason}"),
            Error::Oom { layers, reason } => {
                write!(f, "OOM in layer(s) ")?;
                for (i, l) in layers.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{l}")?;
                }
                write!(f, ": {reason}")
            }
        }
    }
}

impl core::error::Error for Error {}
