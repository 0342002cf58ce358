use std::thread;

use tcn_core::Executor;

/// Runs simulated workers on up to `threads` host threads. Worker `w` goes
/// to thread `w % threads`; results come back in worker order.
#[derive(Debug, Clone, Copy)]
pub struct Threads {
    threads: usize,
}

impl Threads {
    pub fn new(threads: usize) -> Self {
        Self { threads: threads.max(1) }
    }
}

impl Executor for Threads {
    fn map<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        let threads = self.threads.min(n);
        if threads <= 1 {
            return (0..n).map(f).collect();
        }
        let f = &f;
        let mut parts: Vec<Vec<(usize, R)>> = thread::scope(|s| {
            let handles: Vec<_> = (0..threads)
                .map(|id| s.spawn(move || (id..n).step_by(threads).map(|w| (w, f(w))).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker thread panicked")).collect()
        });
        let mut out: Vec<(usize, R)> = parts.iter_mut().flat_map(std::mem::take).collect();
        out.sort_by_key(|&(w, _)| w);
        out.into_iter().map(|(_, r)| r).collect()
    }
}
