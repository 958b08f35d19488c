//! Deterministic data-parallel helpers.
//!
//! Every helper here produces bit-identical results whether the `parallel`
//! feature is on or off: work is split at fixed index boundaries, partial
//! results are collected in index order, and floating-point reductions are
//! performed by a single sequential fold over the ordered partials. Thread
//! count and scheduling therefore never change output bytes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Samples per chunk for chunked sum reductions. Large enough to amortize
/// task overhead, small enough to parallelize mid-sized sample counts.
pub const CHUNK: usize = 1024;

/// Maps `f` over `0..n` and collects results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n` and collects results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sums `d`-dimensional contributions of `n` items into one vector.
///
/// The index range is split into fixed chunks of [`CHUNK`]; each chunk is
/// accumulated sequentially by `term(chunk_range, acc)`, and the ordered
/// chunk partials are folded sequentially. The chunk boundaries (not the
/// scheduler) define the summation tree, which keeps the result
/// deterministic.
pub fn chunked_vec_sum<F>(n: usize, d: usize, term: F) -> Vec<f64>
where
    F: Fn(std::ops::Range<usize>, &mut [f64]) + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(n_chunks, |c| {
        let lo = c * CHUNK;
        let hi = usize::min(lo + CHUNK, n);
        let mut acc = vec![0.0; d];
        term(lo..hi, &mut acc);
        acc
    });
    let mut out = vec![0.0; d];
    for p in &partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// Scalar version of [`chunked_vec_sum`].
pub fn chunked_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials = map_indexed(n_chunks, |c| {
        let lo = c * CHUNK;
        let hi = usize::min(lo + CHUNK, n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        acc
    });
    partials.iter().sum()
}
