//! Data-parallel helpers with a sequential fallback.
//!
//! With the default `parallel` feature the loops below fan out over rayon's
//! pool; without it they run as plain sequential loops. Work is always split
//! at fixed chunk boundaries and reductions stay sequential, so results are
//! bit-identical across both modes and any thread count.

/// Applies `f` to consecutive `chunk`-sized slices of `data`, passing the
/// chunk index. `data.len()` must be a multiple of `chunk`.
#[cfg(feature = "parallel")]
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    use rayon::prelude::*;
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}
