//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon unless parallelism has
//! been switched off at runtime with [`set_enabled`]. Every helper partitions the
//! output into disjoint chunks so results never depend on scheduling.

use std::sync::atomic::{AtomicBool, Ordering};

static ENABLED: AtomicBool = AtomicBool::new(true);

/// Below this many elements per call the work runs inline.
pub const MIN_PARALLEL_LEN: usize = 1 << 14;

pub fn set_enabled(on: bool) {
    ENABLED.store(on, Ordering::Relaxed);
}

pub fn enabled() -> bool {
    cfg!(feature = "parallel") && ENABLED.load(Ordering::Relaxed)
}

/// Runs `f(chunk_index, chunk)` over consecutive chunks of `data`.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if enabled() && data.len() >= MIN_PARALLEL_LEN && data.len() > chunk {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// Splits `data` into about `parts` equal chunks whose length is a multiple of
/// `align`, then runs [`for_each_chunk`]; the closure also gets the chunk's offset.
pub fn for_each_block<T, F>(data: &mut [T], align: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let align = align.max(1);
    let units = data.len() / align;
    let parts = worker_count() * 4;
    let per = units.div_ceil(parts.max(1)).max(1) * align;
    for_each_chunk(data, per, |i, c| f(i * per, c));
}

/// Maps `0..len` to a vector, preserving order.
pub fn map_collect<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if enabled() && len > 1 {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

pub fn worker_count() -> usize {
    #[cfg(feature = "parallel")]
    if enabled() {
        return rayon::current_num_threads();
    }
    1
}
