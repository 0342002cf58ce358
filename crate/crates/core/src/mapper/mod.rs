//! L1 tiling, kernel selection, network planning and tiled execution.
//!
//! Tiles cover the output grid `t_out x c_out`; input channels are never
//! split. Every tile loads its input steps including the causal halo. The
//! executor walks channel tiles in the outer loop and time tiles in the
//! inner one, so a channel tile's weights are loaded once and reused across
//! all its time tiles. Each transfer between L2 and L1 costs
//! `alpha + beta * bytes`.

mod execute;
mod network;
mod tiling;

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

pub use execute::{execute_plan, DmaTrace, LayerRun, PlanExecution, Transfer, TransferKind};
pub use network::{plan_network, select_kernel, LayerKernel, LayerPlan, MappingPlan};
pub use tiling::{evaluate_tiling, input_span, layer_tiles, tile_search, Tile, TilePlan};

/// What the tile search optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Minimum modeled cycles, border tiles included.
    Model,
    /// L1 utilization plus a bonus for tile dims dividing the layer dims.
    Heuristic,
    /// Maximum L1 utilization.
    Memory,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Model, Objective::Heuristic, Objective::Memory];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Model => "model",
            Objective::Heuristic => "heuristic",
            Objective::Memory => "memory",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown objective {s:?}")))
    }
}
