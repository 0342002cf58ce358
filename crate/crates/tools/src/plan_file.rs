//! Plan JSON. Field order is fixed and floats carry four decimals, so a
//! plan file is byte-stable for a given network and hardware model.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use tcn_core::kernels::MemoryBreakdown;
use tcn_core::mapper::{LayerKernel, LayerPlan, MappingPlan};

use crate::error::{Result, ToolError};
use crate::io::{fixed4, read_bytes, write_bytes};

#[derive(Serialize, Deserialize)]
struct L1Bytes {
    input: usize,
    output: usize,
    weights: usize,
    gather: usize,
}

#[derive(Serialize)]
struct LayerOut {
    index: usize,
    kernel: &'static str,
    tile_t_out: usize,
    tile_c_out: usize,
    predicted_cycles: Box<RawValue>,
    l1_bytes_used: L1Bytes,
}

#[derive(Serialize)]
struct PlanOut {
    layers: Vec<LayerOut>,
    total_predicted_cycles: Box<RawValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerIn {
    index: usize,
    kernel: String,
    tile_t_out: usize,
    tile_c_out: usize,
    predicted_cycles: f64,
    l1_bytes_used: L1Bytes,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanIn {
    layers: Vec<LayerIn>,
    total_predicted_cycles: f64,
}

pub fn plan_json(plan: &MappingPlan) -> String {
    let out = PlanOut {
        layers: plan
            .layers
            .iter()
            .map(|l| LayerOut {
                index: l.index,
                kernel: l.kernel.name(),
                tile_t_out: l.tile_t_out,
                tile_c_out: l.tile_c_out,
                predicted_cycles: fixed4(l.predicted_cycles),
                l1_bytes_used: L1Bytes {
                    input: l.l1_bytes_used.input,
                    output: l.l1_bytes_used.output,
                    weights: l.l1_bytes_used.weights,
                    gather: l.l1_bytes_used.gather,
                },
            })
            .collect(),
        total_predicted_cycles: fixed4(plan.total_predicted_cycles),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("plan serializes");
    s.push('\n');
    s
}

pub fn parse_plan(text: &[u8], path: &Path) -> Result<MappingPlan> {
    let p: PlanIn = serde_json::from_slice(text).map_err(|e| ToolError::parse(path, format!("plan: {e}")))?;
    let mut layers = Vec::with_capacity(p.layers.len());
    for (i, l) in p.layers.into_iter().enumerate() {
        let kernel: LayerKernel =
            l.kernel.parse().map_err(|e| ToolError::parse(path, format!("layers[{i}].kernel: {e}")))?;
        layers.push(LayerPlan {
            index: l.index,
            kernel,
            tile_t_out: l.tile_t_out,
            tile_c_out: l.tile_c_out,
            predicted_cycles: l.predicted_cycles,
            l1_bytes_used: MemoryBreakdown {
                input: l.l1_bytes_used.input,
                output: l.l1_bytes_used.output,
                weights: l.l1_bytes_used.weights,
                gather: l.l1_bytes_used.gather,
            },
        });
    }
    Ok(MappingPlan { layers, total_predicted_cycles: p.total_predicted_cycles })
}

pub fn read_plan(path: &Path) -> Result<MappingPlan> {
    parse_plan(&read_bytes(path)?, path)
}

pub fn write_plan(path: &Path, plan: &MappingPlan) -> Result<()> {
    write_bytes(path, plan_json(plan).as_bytes())
}
