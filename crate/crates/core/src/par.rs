//! Data-parallel helpers. With the `parallel` feature these dispatch to
//! rayon; without it they run the same closures sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `out[i] = f(i)` for every index.
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

/// Calls `f(row, chunk)` on consecutive chunks of length `len`.
pub fn for_rows<T, F>(out: &mut [T], len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(len).enumerate().for_each(|(r, c)| f(r, c));
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(len).enumerate().for_each(|(r, c)| f(r, c));
}

/// Collects `f(i)` for `i in 0..n`.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

/// Maps a slice, preserving order.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return items.iter().map(f).collect();
}

const CHUNK: usize = 4096;

/// Sum of `f(i)` over `0..n`. Partial sums are taken over fixed chunks and
/// combined in order, so both backends return bit-identical results.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    });
    partial.iter().sum()
}

/// Maximum of `f(i)` over `0..n` (0 for an empty range).
pub fn max_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).reduce(|| 0.0, f64::max);
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).fold(0.0, f64::max);
}

/// Dot product (deterministic chunked reduction).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_range(a.len(), |i| a[i] * b[i])
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    #[cfg(feature = "parallel")]
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
    #[cfg(not(feature = "parallel"))]
    y.iter_mut().zip(x.iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// `y = x + beta * y`.
pub fn xpby(x: &[f64], beta: f64, y: &mut [f64]) {
    #[cfg(feature = "parallel")]
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi = xi + beta * *yi);
    #[cfg(not(feature = "parallel"))]
    y.iter_mut().zip(x.iter()).for_each(|(yi, xi)| *yi = xi + beta * *yi);
}

/// `y[i] = f(y[i], x[i])`.
pub fn fill_zip<F>(y: &mut [f64], x: &[f64], f: F)
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi = f(*yi, *xi));
    #[cfg(not(feature = "parallel"))]
    y.iter_mut().zip(x.iter()).for_each(|(yi, xi)| *yi = f(*yi, *xi));
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
