//! Execution helpers shared by the hot loops.
//!
//! Work is cut into fixed-size chunks regardless of the thread count, each
//! chunk is reduced sequentially and the chunk results are combined by a
//! pairwise tree. The result is therefore bit-identical whether or not the
//! parallel backend is active.

use std::sync::atomic::{AtomicBool, Ordering};

pub const CHUNK: usize = 1024;

static PARALLEL: AtomicBool = AtomicBool::new(true);

/// Switch the parallel backend on or off at runtime. Without the `parallel`
/// feature this is a no-op and everything runs sequentially.
pub fn set_parallel(on: bool) {
    PARALLEL.store(on, Ordering::SeqCst);
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::SeqCst)
}

/// Configure the global thread pool. Returns false if it was already built.
pub fn set_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

/// Order-preserving map over `0..n`.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Order-preserving map over a slice.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync + Send,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_range(items.len(), |i| f(&items[i]))
}

fn pairwise<T: Copy, G: Fn(T, T) -> T>(mut v: Vec<T>, zero: T, add: &G) -> T {
    if v.is_empty() {
        return zero;
    }
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        for pair in v.chunks(2) {
            next.push(if pair.len() == 2 { add(pair[0], pair[1]) } else { pair[0] });
        }
        v = next;
    }
    v[0]
}

/// Deterministic reduction of `f(0) + ... + f(n-1)`.
pub fn reduce<T, F, G>(n: usize, zero: T, f: F, add: G) -> T
where
    T: Copy + Send + Sync,
    F: Fn(usize) -> T + Sync + Send,
    G: Fn(T, T) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut acc = zero;
        for i in lo..hi {
            acc = add(acc, f(i));
        }
        acc
    });
    pairwise(partial, zero, &add)
}

pub fn sum(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    reduce(n, 0.0, f, |a, b| a + b)
}

/// Deterministic sum of per-item values computed from a slice.
pub fn sum_slice<T: Sync + Send>(items: &[T], f: impl Fn(&T) -> f64 + Sync + Send) -> f64 {
    sum(items.len(), |i| f(&items[i]))
}

/// Sum of values that were already materialized, in the same chunked order.
pub fn sum_values(values: &[f64]) -> f64 {
    sum(values.len(), |i| values[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        set_parallel(true);
        let a = sum(100_003, f);
        set_parallel(false);
        let b = sum(100_003, f);
        set_parallel(true);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn map_keeps_order() {
        let v = map_range(5000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(sum(0, |_| 1.0), 0.0);
    }
}
