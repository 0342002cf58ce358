//! Per-layer run report: predicted versus event cycles.

use std::fmt::Write;

use tcn_core::kernels::MemoryBreakdown;
use tcn_core::mapper::{MappingPlan, PlanExecution};
use tcn_core::{Layer, NetworkSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub layer: usize,
    pub kernel: &'static str,
    pub tile_t: usize,
    pub tile_cout: usize,
    pub macs: u64,
    pub pred_cycles: f64,
    pub event_cycles: f64,
    pub l1_bytes: usize,
}

impl ReportRow {
    pub fn macs_per_cycle(&self) -> f64 {
        if self.event_cycles > 0.0 {
            self.macs as f64 / self.event_cycles
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
}

/// Logical multiply-accumulates of a layer; pooling has none.
pub fn layer_macs(layer: &Layer) -> u64 {
    match layer {
        Layer::Conv1D(s) => s.shape().macs(),
        Layer::Linear(s) => (s.in_features * s.out_features) as u64,
        Layer::AvgPool1D(_) => 0,
    }
}

impl RunReport {
    pub fn new(net: &NetworkSpec, plan: &MappingPlan, run: &PlanExecution) -> Self {
        let rows = net
            .layers()
            .iter()
            .zip(&plan.layers)
            .zip(&run.layers)
            .map(|((layer, p), r)| ReportRow {
                layer: p.index,
                kernel: p.kernel.name(),
                tile_t: p.tile_t_out,
                tile_cout: p.tile_c_out,
                macs: layer_macs(layer),
                pred_cycles: p.predicted_cycles,
                event_cycles: r.event_cycles(),
                l1_bytes: MemoryBreakdown::total(&p.l1_bytes_used),
            })
            .collect();
        Self { rows }
    }

    pub fn total(&self) -> ReportRow {
        ReportRow {
            layer: self.rows.len(),
            kernel: "total",
            tile_t: 0,
            tile_cout: 0,
            macs: self.rows.iter().map(|r| r.macs).sum(),
            pred_cycles: self.rows.iter().map(|r| r.pred_cycles).sum(),
            event_cycles: self.rows.iter().map(|r| r.event_cycles).sum(),
            l1_bytes: self.rows.iter().map(|r| r.l1_bytes).max().unwrap_or(0),
        }
    }

    /// CSV with one row per layer and a closing `total` row.
    pub fn csv(&self) -> String {
        let mut s = String::from("layer,kernel,tile_t,tile_cout,macs,pred_cycles,event_cycles,macs_per_cycle,l1_bytes\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.4},{:.4},{:.4},{}",
                r.layer,
                r.kernel,
                r.tile_t,
                r.tile_cout,
                r.macs,
                r.pred_cycles,
                r.event_cycles,
                r.macs_per_cycle(),
                r.l1_bytes
            );
        }
        let t = self.total();
        let _ = writeln!(
            s,
            "total,,,,{},{:.4},{:.4},{:.4},{}",
            t.macs,
            t.pred_cycles,
            t.event_cycles,
            t.macs_per_cycle(),
            t.l1_bytes
        );
        s
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:>5}  {:<9}  {:>6}  {:>9}  {:>12}  {:>16}  {:>16}  {:>10}  {:>8}\n",
            "layer", "kernel", "tile_t", "tile_cout", "macs", "pred_cycles", "event_cycles", "macs/cyc", "l1_bytes"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>5}  {:<9}  {:>6}  {:>9}  {:>12}  {:>16.4}  {:>16.4}  {:>10.4}  {:>8}",
                r.layer,
                r.kernel,
                r.tile_t,
                r.tile_cout,
                r.macs,
                r.pred_cycles,
                r.event_cycles,
                r.macs_per_cycle(),
                r.l1_bytes
            );
        }
        let t = self.total();
        let _ = writeln!(
            s,
            "{:>5}  {:<9}  {:>6}  {:>9}  {:>12}  {:>16.4}  {:>16.4}  {:>10.4}  {:>8}",
            "", "total", "", "", t.macs, t.pred_cycles, t.event_cycles, t.macs_per_cycle(), t.l1_bytes
        );
        s
    }
}
