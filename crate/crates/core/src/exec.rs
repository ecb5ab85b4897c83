//! Parallel execution helpers with a sequential fallback.
//!
//! Built with the `parallel` feature (the default) the helpers dispatch to
//! rayon; without it they run plain loops. Reductions always use the same
//! fixed chunked summation tree, so a given input produces bit-identical
//! results under either mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk width for deterministic summation. Partial sums are taken over
/// consecutive 4096-element blocks and folded in block order.
pub const SUM_CHUNK: usize = 4096;

/// Whether this build dispatches data-parallel loops to rayon.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Order-preserving indexed map.
pub fn map_indexed<T: Send, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Apply `f` to fixed-size chunks of `data`; the chunk index comes first.
pub fn for_each_chunk_mut<T: Send, F>(data: &mut [T], chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

fn block_sum(values: &[f64]) -> f64 {
    values.iter().sum()
}

/// Deterministic sum: per-block partials folded in block order.
pub fn sum(values: &[f64]) -> f64 {
    let partials = {
        #[cfg(feature = "parallel")]
        {
            values
                .par_chunks(SUM_CHUNK)
                .map(block_sum)
                .collect::<Vec<_>>()
        }
        #[cfg(not(feature = "parallel"))]
        {
            values.chunks(SUM_CHUNK).map(block_sum).collect::<Vec<_>>()
        }
    };
    partials.iter().sum()
}

/// Deterministic sum of `f(i)` for `i in 0..n`, chunked as in [`sum`].
pub fn sum_with<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(SUM_CHUNK);
    let partials = map_indexed(blocks, |b| {
        let lo = b * SUM_CHUNK;
        let hi = (lo + SUM_CHUNK).min(n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    partials.iter().sum()
}

/// Deterministic dot product of equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_with(a.len(), |i| a[i] * b[i])
}

/// Maximum of `|x|` over a slice (0.0 for empty input).
pub fn max_abs(values: &[f64]) -> f64 {
    let partials = map_indexed(values.len().div_ceil(SUM_CHUNK), |b| {
        let lo = b * SUM_CHUNK;
        let hi = (lo + SUM_CHUNK).min(values.len());
        values[lo..hi].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    });
    partials.into_iter().fold(0.0, f64::max)
}
