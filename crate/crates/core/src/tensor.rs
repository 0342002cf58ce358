//! Time-major (TC) int8 feature maps.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Flat offset of element `(t, c)` in a TC-layout tensor with `channels`
/// channels and `timesteps` steps.
pub fn tc_offset(t: usize, c: usize, channels: usize, timesteps: usize) -> Result<usize> {
    if t >= timesteps {
        return Err(Error::OutOfBounds { what: "timestep", index: t, len: timesteps });
    }
    if c >= channels {
        return Err(Error::OutOfBounds { what: "channel", index: c, len: channels });
    }
    Ok(t * channels + c)
}

/// int8 feature map stored time-major: all channels of one step are
/// contiguous, step `t` starts at `t * channels`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantTensorTC {
    data: Vec<i8>,
    channels: usize,
    timesteps: usize,
    scale: f32,
}

impl QuantTensorTC {
    pub fn new(channels: usize, timesteps: usize, data: Vec<i8>, scale: f32) -> Result<Self> {
        if channels == 0 || timesteps == 0 {
            return Err(Error::Shape(alloc::format!(
                "tensor dimensions must be positive, got c={channels} t={timesteps}"
            )));
        }
        if data.len() != channels * timesteps {
            return Err(Error::Shape(alloc::format!(
                "tensor payload holds {} values, expected c*t = {}",
                data.len(),
                channels * timesteps
            )));
        }
        if !(scale > 0.0) {
            return Err(Error::Shape(alloc::format!("tensor scale must be positive, got {scale}")));
        }
        Ok(Self { data, channels, timesteps, scale })
    }

    pub fn zeros(channels: usize, timesteps: usize) -> Result<Self> {
        Self::new(channels, timesteps, vec![0; channels * timesteps], 1.0)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn scale(&self) -> f32 {
        self.scale
    }

    pub fn with_scale(mut self, scale: f32) -> Self {
        if scale > 0.0 {
            self.scale = scale;
        }
        self
    }

    pub fn data(&self) -> &[i8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<i8> {
        self.data
    }

    pub fn get(&self, t: usize, c: usize) -> Result<i8> {
        Ok(self.data[tc_offset(t, c, self.channels, self.timesteps)?])
    }

    /// All channels of step `t`.
    pub fn row(&self, t: usize) -> &[i8] {
        &self.data[t * self.channels..(t + 1) * self.channels]
    }
}
