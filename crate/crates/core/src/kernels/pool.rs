//! Average pooling over time.
//!
//! Output steps are split over workers like the convolutions. Each output
//! step is one iteration costing `epsilon + delta * ceil(window * c / 4)`.

use alloc::vec::Vec;

use super::trace::{ExecutionTrace, IterationEvents};
use super::InputView;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::hw::HardwareModel;
use crate::layer::PoolSpec;

fn pool_steps(channels: usize, pool: PoolSpec) -> u64 {
    (pool.window * channels).div_ceil(4) as u64
}

/// Predicted cycles for `t_len` output steps on `hw.n_cores` cores.
pub fn avgpool_cycles(channels: usize, pool: PoolSpec, t_len: usize, hw: &HardwareModel) -> f64 {
    let per_core = t_len.div_ceil(hw.n_cores) as f64;
    per_core * (hw.epsilon + hw.delta * pool_steps(channels, pool) as f64)
}

/// Pools output steps `t_start..t_start + t_len` from the resident input.
pub fn avgpool_window<E: Executor>(
    exec: &E,
    x: InputView<'_>,
    pool: PoolSpec,
    t_start: usize,
    t_len: usize,
    hw: &HardwareModel,
    n_workers: usize,
) -> Result<(Vec<i8>, ExecutionTrace)> {
    if n_workers == 0 || n_workers > hw.n_cores {
        return Err(Error::Config(alloc::format!("n_workers must be in 1..={}, got {n_workers}", hw.n_cores)));
    }
    if pool.window == 0 || pool.stride == 0 {
        return Err(Error::Shape("pool window and stride must be positive".into()));
    }
    if t_len > 0 {
        let first = t_start * pool.stride;
        let last = (t_start + t_len - 1) * pool.stride + pool.window - 1;
        if first < x.origin() || last >= x.origin() + x.rows() {
            return Err(Error::Shape(alloc::format!(
                "pool window needs input steps {first}..={last}, only {}..{} are resident",
                x.origin(),
                x.origin() + x.rows()
            )));
        }
    }
    let c = x.channels;
    let chunk = t_len.div_ceil(n_workers);
    let parts = exec.map(n_workers, |w| {
        let lo = (w * chunk).min(t_len);
        let hi = ((w + 1) * chunk).min(t_len);
        let mut out = Vec::with_capacity((hi - lo) * c);
        let mut trace = ExecutionTrace::default();
        let ev = IterationEvents { steps: pool_steps(c, pool), ..IterationEvents::default() };
        let mut sums = alloc::vec![0i32; c];
        for t in lo..hi {
            sums.iter_mut().for_each(|s| *s = 0);
            let base = (t_start + t) * pool.stride;
            for j in 0..pool.window {
                for (s, &v) in sums.iter_mut().zip(x.row(base + j)) {
                    *s += i32::from(v);
                }
            }
            out.extend(sums.iter().map(|&s| (s / pool.window as i32) as i8));
            trace.close_iteration(&ev, hw);
        }
        (out, trace)
    });
    let mut out = Vec::with_capacity(t_len * c);
    let mut traces = Vec::with_capacity(parts.len());
    for (o, t) in parts {
        out.extend_from_slice(&o);
        traces.push(t);
    }
    Ok((out, ExecutionTrace::join_parallel(traces)))
}
