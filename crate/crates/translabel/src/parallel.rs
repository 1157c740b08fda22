//! Ordered per-sentence map behind the corpus-level helpers.
//!
//! With the default `parallel` feature the map fans out over rayon's global
//! pool; without it the same calls run sequentially. Results keep input
//! order either way, so outputs are byte-identical across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items`, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential twin of [`map_ordered`], kept available for comparison even
/// when the parallel feature is on.
pub fn map_ordered_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Caps the worker pool at `jobs` threads. Call at most once, before any
/// parallel work; later calls fail once the pool exists.
#[cfg(feature = "parallel")]
pub fn set_jobs(jobs: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Without the parallel feature there is no pool to size; the request is a
/// no-op.
#[cfg(not(feature = "parallel"))]
pub fn set_jobs(_jobs: usize) -> Result<(), String> {
    Ok(())
}
