//! Lattice search for the cost constants.
//!
//! The search walks a small lattice of `(alpha, beta, gamma, delta,
//! epsilon, gamma_prime)` points in lexicographic order and keeps the first
//! one under which [`select_kernel`] picks the expected variant for every
//! target layer. Selection is tiling-aware: it runs against the L1 budget of
//! the base hardware model. Lattice values are dyadic, so model and trace
//! cycle counts stay exactly representable.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hw::HardwareModel;
use crate::kernels::KernelVariant;
use crate::layer::ConvShape;
use crate::mapper::{select_kernel, Objective};

/// Candidate constants, one value list per axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Lattice {
    Grid {
        alpha: Vec<f64>,
        beta: Vec<f64>,
        gamma: Vec<f64>,
        delta: Vec<f64>,
        epsilon: Vec<f64>,
        gamma_prime: Vec<f64>,
    },
    /// Every constant set to the same value.
    Diagonal(Vec<f64>),
}

impl Default for Lattice {
    /// 1440 points around typical cluster figures: DMA setup of tens of
    /// cycles, an eighth to one cycle per byte, a few cycles of loop
    /// overhead per block and per segment.
    fn default() -> Self {
        Lattice::Grid {
            alpha: alloc::vec![8.0, 16.0, 32.0, 64.0],
            beta: alloc::vec![0.125, 0.25, 0.5, 1.0],
            gamma: alloc::vec![4.0, 8.0, 16.0],
            delta: alloc::vec![1.0, 2.0],
            epsilon: alloc::vec![8.0, 16.0, 32.0],
            gamma_prime: alloc::vec![2.0, 4.0, 8.0, 16.0, 32.0],
        }
    }
}

impl Lattice {
    /// Points as `[alpha, beta, gamma, delta, epsilon, gamma_prime]`, in
    /// lexicographic order.
    pub fn points(&self) -> Vec<[f64; 6]> {
        match self {
            Lattice::Diagonal(vals) => vals.iter().map(|&v| [v; 6]).collect(),
            Lattice::Grid { alpha, beta, gamma, delta, epsilon, gamma_prime } => {
                let mut pts = Vec::new();
                for &a in alpha {
                    for &b in beta {
                        for &g in gamma {
                            for &d in delta {
                                for &e in epsilon {
                                    for &gp in gamma_prime {
                                        pts.push([a, b, g, d, e, gp]);
                                    }
                                }
                            }
                        }
                    }
                }
                pts
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub shape: ConvShape,
    pub expected: KernelVariant,
}

/// The three layers of the reference best-kernel table (K=3).
pub fn table1_targets() -> [Target; 3] {
    [
        Target { shape: ConvShape::layer(64, 256, 64, 3, 1, 1), expected: KernelVariant::NoIm2col },
        Target { shape: ConvShape::layer(256, 16, 256, 3, 2, 1), expected: KernelVariant::Im2col },
        Target { shape: ConvShape::layer(1024, 16, 1024, 3, 2, 1), expected: KernelVariant::Indirect },
    ]
}

pub fn with_constants(base: &HardwareModel, p: [f64; 6]) -> HardwareModel {
    let [alpha, beta, gamma, delta, epsilon, gamma_prime] = p;
    HardwareModel { alpha, beta, gamma, delta, epsilon, gamma_prime, ..*base }
}

/// Whether `hw` selects the expected variant for every target.
pub fn reproduces(hw: &HardwareModel, targets: &[Target]) -> bool {
    targets.iter().all(|t| {
        select_kernel(&t.shape, hw, Objective::Model, &KernelVariant::ALL).is_ok_and(|p| p.variant == t.expected)
    })
}

/// Returns `base` with the first lattice point that reproduces `targets`.
/// Only the six cost constants change; core count and memory sizes come
/// from `base`.
pub fn calibrate(base: &HardwareModel, lattice: &Lattice, targets: &[Target]) -> Result<HardwareModel> {
    base.validate()?;
    let points = lattice.points();
    // Cheaper targets first: a point usually fails on the smaller layers.
    let mut order: Vec<&Target> = targets.iter().collect();
    order.sort_by_key(|t| t.shape.t_out * t.shape.c_out);
    let ordered: Vec<Target> = order.into_iter().copied().collect();
    points
        .iter()
        .map(|&p| with_constants(base, p))
        .find(|hw| reproduces(hw, &ordered))
        .ok_or_else(|| Error::Calibration(format!("none of the {} lattice points reproduces the targets", points.len())))
}
