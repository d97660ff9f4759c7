//! Worker-pool plumbing.
//!
//! All parallel loops in the crate go through [`install`], which lazily builds
//! a rayon pool sized by the `THERMOKIT_THREADS` environment variable (read
//! once, at first use). Reductions elsewhere are written to combine partial
//! results in a fixed order, so the numbers coming out of a run do not depend
//! on how many workers the pool has.

use once_cell::sync::Lazy;
use rayon::ThreadPool;

static POOL: Lazy<ThreadPool> = Lazy::new(|| {
    let threads = std::env::var("THERMOKIT_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .thread_name(|i| format!("thermokit-{i}"))
        .build()
        .expect("failed to build worker pool")
});

/// Run `f` inside the crate's worker pool.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    POOL.install(f)
}

/// Number of workers the pool was built with.
pub fn workers() -> usize {
    POOL.current_num_threads()
}
