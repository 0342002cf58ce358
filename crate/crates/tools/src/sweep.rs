//! Parameter sweeps of a single layer: predicted versus event cycles for
//! each kernel variant, untiled, on all cores.

use std::fmt::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcn_core::costmodel::layer_cycles;
use tcn_core::kernels::run_conv_with;
use tcn_core::{ConvLayerSpec, ConvWeights, Executor, HardwareModel, KernelVariant, QuantTensorTC, RequantParams};

use crate::error::{Result, ToolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Cin,
    Cout,
    T,
    K,
    D,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Cin => "cin",
            SweepParam::Cout => "cout",
            SweepParam::T => "t",
            SweepParam::K => "k",
            SweepParam::D => "d",
        }
    }
}

impl FromStr for SweepParam {
    type Err = ToolError;

    fn from_str(s: &str) -> Result<Self> {
        [SweepParam::Cin, SweepParam::Cout, SweepParam::T, SweepParam::K, SweepParam::D]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ToolError::Usage(format!("unknown sweep parameter {s:?} (cin, cout, t, k or d)")))
    }
}

/// Inclusive range `start:end[:step]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepRange {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step).collect()
    }
}

impl FromStr for SweepRange {
    type Err = ToolError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || ToolError::Usage(format!("range {s:?} is not start:end[:step]"));
        let parts: Vec<&str> = s.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let num = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
        let r = SweepRange {
            start: num(parts[0])?,
            end: num(parts[1])?,
            step: parts.get(2).map(|p| num(p)).transpose()?.unwrap_or(1),
        };
        if r.step == 0 || r.start > r.end || r.start == 0 {
            return Err(ToolError::Usage(format!("range {s:?} is empty")));
        }
        Ok(r)
    }
}

/// The layer every sweep point starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepBase {
    pub c_in: usize,
    pub c_out: usize,
    pub t: usize,
    pub k: usize,
    pub d: usize,
}

impl Default for SweepBase {
    fn default() -> Self {
        Self { c_in: 64, c_out: 64, t: 64, k: 3, d: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: usize,
    pub variant: KernelVariant,
    pub macs: u64,
    pub predicted_cycles: f64,
    pub event_cycles: f64,
}

fn layer_at(base: SweepBase, param: SweepParam, v: usize, rng: &mut ChaCha8Rng) -> ConvLayerSpec {
    let mut b = base;
    match param {
        SweepParam::Cin => b.c_in = v,
        SweepParam::Cout => b.c_out = v,
        SweepParam::T => b.t = v,
        SweepParam::K => b.k = v,
        SweepParam::D => b.d = v,
    }
    let w = (0..b.c_out * b.k * b.c_in).map(|_| rng.gen::<i8>()).collect();
    let rq = RequantParams::new(vec![1; b.c_out], vec![0; b.c_out], 10, false).expect("valid requant");
    let w = ConvWeights::new(b.c_out, b.k, b.c_in, w).expect("valid weights");
    ConvLayerSpec::new(b.c_in, b.c_out, b.t, b.k, b.d, 1, w, rq).expect("valid sweep layer")
}

pub fn sweep<E: Executor>(
    exec: &E,
    hw: &HardwareModel,
    base: SweepBase,
    param: SweepParam,
    range: SweepRange,
    variants: &[KernelVariant],
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for v in range.values() {
        let spec = layer_at(base, param, v, &mut rng);
        let data = (0..spec.c_in * spec.t_in).map(|_| rng.gen::<i8>()).collect();
        let x = QuantTensorTC::new(spec.c_in, spec.t_in, data, 1.0)?;
        for &variant in variants {
            let (_, trace) = run_conv_with(exec, variant, &x, &spec, hw, hw.n_cores)?;
            rows.push(SweepRow {
                value: v,
                variant,
                macs: spec.shape().macs(),
                predicted_cycles: layer_cycles(variant, &spec.shape(), hw).total_cyc,
                event_cycles: trace.total_cycles_event,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let mut s = String::from("param,value,variant,macs,predicted_cycles,event_cycles,macs_per_cycle\n");
    for r in rows {
        let mpc = if r.event_cycles > 0.0 { r.macs as f64 / r.event_cycles } else { 0.0 };
        let _ = writeln!(
            s,
            "{},{},{},{},{:.4},{:.4},{:.4}",
            param.name(),
            r.value,
            r.variant,
            r.macs,
            r.predicted_cycles,
            r.event_cycles,
            mpc
        );
    }
    s
}
