//! Range sharding over rayon with a sequential fallback.
//!
//! Work is split into fixed-size chunks whose boundaries do not depend on the
//! worker count, and partial results are merged in chunk order. Any reduction
//! that is associative therefore yields the same value serially and in
//! parallel.

use std::ops::Range;

/// How many threads a data-parallel routine may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// Run on the calling thread.
    Serial,
    /// Use the global rayon pool.
    #[default]
    Auto,
    /// Use a dedicated pool with exactly this many threads.
    Fixed(usize),
}

impl Workers {
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            None | Some(0) => Workers::Auto,
            Some(1) => Workers::Serial,
            Some(t) => Workers::Fixed(t),
        }
    }

    fn is_serial(self) -> bool {
        matches!(self, Workers::Serial | Workers::Fixed(0) | Workers::Fixed(1))
            || !cfg!(feature = "parallel")
    }
}

/// Splits `range` into chunks of `chunk` indices, maps each chunk and folds the
/// results left to right with `reduce`.
pub fn map_reduce_chunks<T, M, R>(
    range: Range<u64>,
    chunk: u64,
    workers: Workers,
    identity: T,
    map: M,
    reduce: R,
) -> T
where
    T: Send + Clone,
    M: Fn(Range<u64>) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let len = range.end.saturating_sub(range.start);
    let n_chunks = len.div_ceil(chunk);
    let bounds = move |i: u64| {
        let lo = range.start + i * chunk;
        lo..(lo + chunk).min(range.end)
    };
    if workers.is_serial() || n_chunks <= 1 {
        return (0..n_chunks).map(bounds).map(&map).fold(identity, &reduce);
    }
    parallel::run(workers, n_chunks, identity, &|i| map(bounds(i)), &reduce)
}

#[cfg(feature = "parallel")]
mod parallel {
    use super::Workers;
    use rayon::prelude::*;

    pub(super) fn run<T, M, R>(workers: Workers, n_chunks: u64, identity: T, map: &M, reduce: &R) -> T
    where
        T: Send + Clone,
        M: Fn(u64) -> T + Sync,
        R: Fn(T, T) -> T + Sync,
    {
        // collect keeps chunk order, so the fold below is order-stable
        let job = || {
            (0..n_chunks)
                .into_par_iter()
                .map(map)
                .collect::<Vec<_>>()
        };
        let parts = match workers {
            Workers::Fixed(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                Ok(pool) => pool.install(job),
                Err(_) => job(),
            },
            _ => job(),
        };
        parts.into_iter().fold(identity, reduce)
    }
}

#[cfg(not(feature = "parallel"))]
mod parallel {
    use super::Workers;

    pub(super) fn run<T, M, R>(_: Workers, n_chunks: u64, identity: T, map: &M, reduce: &R) -> T
    where
        M: Fn(u64) -> T,
        R: Fn(T, T) -> T,
    {
        (0..n_chunks).map(map).fold(identity, reduce)
    }
}

/// Runs `f` inside a pool sized for `workers`. Used where rayon iterators are
/// driven directly rather than through [`map_reduce_chunks`].
pub fn install<T: Send>(workers: Workers, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if let Workers::Fixed(t) = workers {
        if t > 1 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(t).build() {
                return pool.install(f);
            }
        }
    }
    let _ = workers;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_serial_for_any_worker_count() {
        let sum = |w| {
            map_reduce_chunks(3..10_007, 97, w, 0u64, |r| r.map(|x| x * x % 13).sum(), |a, b| a + b)
        };
        let expected: u64 = (3..10_007u64).map(|x| x * x % 13).sum();
        for w in [Workers::Serial, Workers::Auto, Workers::Fixed(3), Workers::Fixed(8)] {
            assert_eq!(sum(w), expected);
        }
    }

    #[test]
    fn ordered_merge_is_stable() {
        let cat = |w| {
            map_reduce_chunks(0..50, 7, w, Vec::new(), |r| r.collect::<Vec<_>>(), |mut a, b| {
                a.extend(b);
                a
            })
        };
        assert_eq!(cat(Workers::Fixed(4)), (0..50).collect::<Vec<_>>());
        assert_eq!(cat(Workers::Serial), (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn empty_range_returns_identity() {
        let v = map_reduce_chunks(5..5, 4, Workers::Auto, 42u32, |_| 1, |a, b| a + b);
        assert_eq!(v, 42);
    }
}
