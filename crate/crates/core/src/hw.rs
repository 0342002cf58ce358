//! Hardware description: core count, scratchpad budgets and cost constants.

use alloc::format;

use crate::error::{Error, Result};

/// A two-level scratchpad platform with `n_cores` cluster cores.
///
/// The cycle constants weight primitive events: `alpha` per DMA invocation,
/// `beta` per byte moved (or per pointer written), `gamma` per MatMul block,
/// `delta` per 4-wide MAC step, `epsilon` per convolution iteration and
/// `gamma_prime` per indirect-buffer segment loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareModel {
    pub n_cores: usize,
    pub l1_bytes: usize,
    pub l2_bytes: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma_prime: f64,
    pub offset_bytes: usize,
}

impl HardwareModel {
    /// GAP-8-like cluster: 8 cores, 64 KiB L1. L2 is 4 MiB so that the
    /// largest benchmark layers fit. The cost constants are the result of
    /// [`crate::calibrate::calibrate`] with the default lattice.
    pub fn gap8_like() -> Self {
        Self {
            n_cores: 8,
            l1_bytes: 64 * 1024,
            l2_bytes: 4 * 1024 * 1024,
            alpha: 8.0,
            beta: 0.125,
            gamma: 4.0,
            delta: 1.0,
            epsilon: 8.0,
            gamma_prime: 8.0,
            offset_bytes: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cores == 0 || self.l1_bytes == 0 || self.l2_bytes == 0 || self.offset_bytes == 0 {
            return Err(Error::Config("n_cores, l1_bytes, l2_bytes and offset_bytes must be positive".into()));
        }
        if self.l1_bytes >= self.l2_bytes {
            return Err(Error::Config(format!(
                "l1_bytes ({}) must be smaller than l2_bytes ({})",
                self.l1_bytes, self.l2_bytes
            )));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("gamma_prime", self.gamma_prime),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a non-negative finite number, got {v}")));
            }
        }
        Ok(())
    }

    /// DMA cost of one L2<->L1 transfer of `bytes`.
    pub fn transfer_cycles(&self, bytes: usize) -> f64 {
        self.alpha + self.beta * bytes as f64
    }
}

impl Default for HardwareModel {
    fn default() -> Self {
        Self::gap8_like()
    }
}
