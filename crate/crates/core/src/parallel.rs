//! Data-parallel map with a sequential fallback.
//!
//! All heavy loops (root sweeps, fiber solves, energy rows, pixel rows) are
//! expressed as independent maps over an index range whose results are then
//! combined in index order. With the `parallel` feature the map runs on the
//! rayon pool; without it the exact same per-index computation runs on one
//! thread, so results are bit-identical across both builds and across any
//! thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}
