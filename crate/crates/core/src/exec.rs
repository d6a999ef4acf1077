//! Data-parallel execution of independent indexed tasks.
//!
//! Results are always collected in index order, and every reduction in this
//! crate folds fixed-size chunks sequentially, so output is identical whether
//! tasks run on one thread or many. With the `parallel` feature disabled, or
//! inside [`with_mode`]`(Mode::Sequential, ..)`, tasks run on the caller's thread.

use std::cell::Cell;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

thread_local! {
    static MODE: Cell<Mode> = const { Cell::new(Mode::Parallel) };
}

/// Run `f` with the given execution mode on this thread.
pub fn with_mode<R>(mode: Mode, f: impl FnOnce() -> R) -> R {
    let prev = MODE.with(|m| m.replace(mode));
    let out = f();
    MODE.with(|m| m.set(prev));
    out
}

pub fn current_mode() -> Mode {
    if cfg!(feature = "parallel") {
        MODE.with(|m| m.get())
    } else {
        Mode::Sequential
    }
}

/// Evaluate `f(0), .., f(count - 1)` and return the results in index order.
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match current_mode() {
        Mode::Sequential => (0..count).map(f).collect(),
        Mode::Parallel => parallel_map(count, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Cap the global worker pool. Only the first call takes effect.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

/// Split `total` items into chunks of `chunk` items (the last may be short).
pub fn chunk_bounds(total: usize, chunk: usize) -> Vec<(usize, usize)> {
    let chunk = chunk.max(1);
    (0..total.div_ceil(chunk))
        .map(|i| (i * chunk, ((i + 1) * chunk).min(total)))
        .collect()
}
