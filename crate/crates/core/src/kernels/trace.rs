use core::ops::AddAssign;

use crate::hw::HardwareModel;

/// Counters of simulated primitive events, plus the cycles they cost under
/// a [`HardwareModel`].
///
/// Counters are totals over all workers. The cycle fields describe the
/// critical path: for a parallel run they are those of the slowest worker,
/// for a sequence of runs (tiles) they add up.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExecutionTrace {
    /// DMA transfers issued while building im2col buffers.
    pub dma_invocations: u64,
    /// Bytes written into gather buffers (copied data or offset entries).
    pub elements_copied: u64,
    /// Indirect-buffer entries written.
    pub offset_entries: u64,
    /// MatMul blocks (up to 4 output channels x up to 2 time steps).
    pub mm_iterations: u64,
    /// Trip count of the 4-wide inner loop, summed over blocks.
    pub mm_steps: u64,
    /// Indirect-buffer segments walked, summed over blocks.
    pub segment_loops: u64,
    /// 4-wide SIMD dot products.
    pub macgroup_ops: u64,
    /// Outer iterations (one or two output steps each).
    pub conv_iterations: u64,
    pub gather_cycles_event: f64,
    pub mm_cycles_event: f64,
    pub total_cycles_event: f64,
}

impl ExecutionTrace {
    /// Merges the traces of workers that ran concurrently.
    pub fn join_parallel<I: IntoIterator<Item = ExecutionTrace>>(workers: I) -> ExecutionTrace {
        let mut merged = ExecutionTrace::default();
        let mut critical: Option<ExecutionTrace> = None;
        for w in workers {
            merged.add_counters(&w);
            if critical.map_or(true, |c| w.total_cycles_event > c.total_cycles_event) {
                critical = Some(w);
            }
        }
        if let Some(c) = critical {
            merged.gather_cycles_event = c.gather_cycles_event;
            merged.mm_cycles_event = c.mm_cycles_event;
            merged.total_cycles_event = c.total_cycles_event;
        }
        merged
    }

    fn add_counters(&mut self, o: &ExecutionTrace) {
        self.dma_invocations += o.dma_invocations;
        self.elements_copied += o.elements_copied;
        self.offset_entries += o.offset_entries;
        self.mm_iterations += o.mm_iterations;
        self.mm_steps += o.mm_steps;
        self.segment_loops += o.segment_loops;
        self.macgroup_ops += o.macgroup_ops;
        self.conv_iterations += o.conv_iterations;
    }

    /// Accounts the gather phase of one iteration.
    pub(crate) fn record_gather(&mut self, it: &IterationEvents, hw: &HardwareModel) {
        let gather = (hw.alpha * it.dma_invocations as f64)
            .max(hw.beta * (it.dma_bytes + it.offset_entries) as f64);
        self.dma_invocations += it.dma_invocations;
        self.elements_copied += it.dma_bytes + it.offset_entries * hw.offset_bytes as u64;
        self.offset_entries += it.offset_entries;
        self.gather_cycles_event += gather;
        self.total_cycles_event += gather;
    }

    /// Accounts a whole outer iteration: `epsilon + gather + sum of blocks`.
    pub(crate) fn close_iteration(&mut self, it: &IterationEvents, hw: &HardwareModel) {
        self.record_gather(it, hw);
        let mm = hw.gamma * it.blocks as f64 + hw.delta * it.steps as f64 + hw.gamma_prime * it.segments as f64;
        self.conv_iterations += 1;
        self.mm_iterations += it.blocks;
        self.mm_steps += it.steps;
        self.segment_loops += it.segments;
        self.macgroup_ops += it.macgroups;
        self.mm_cycles_event += mm;
        self.total_cycles_event += hw.epsilon + mm;
    }
}

/// Sequential composition.
impl AddAssign for ExecutionTrace {
    fn add_assign(&mut self, o: ExecutionTrace) {
        self.add_counters(&o);
        self.gather_cycles_event += o.gather_cycles_event;
        self.mm_cycles_event += o.mm_cycles_event;
        self.total_cycles_event += o.total_cycles_event;
    }
}

/// Events of one outer convolution iteration.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct IterationEvents {
    pub dma_invocations: u64,
    pub dma_bytes: u64,
    pub offset_entries: u64,
    pub blocks: u64,
    pub steps: u64,
    pub segments: u64,
    pub macgroups: u64,
}
