//! Execution strategy for data-parallel loops.
//!
//! Reductions are done over fixed-size chunks whose partial results are
//! combined in index order, so both strategies give bit-identical floats.
//! Without the `parallel` feature, `Parallel` silently runs sequentially.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Default chunk length for chunked reductions.
pub const CHUNK: usize = 4096;

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// `f(i)` for every `i` in `range`, in order.
    pub fn map<T, F>(self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return range.into_par_iter().map(f).collect();
        }
        range.map(f).collect()
    }

    /// Splits `0..n` into chunks of `chunk` indices and maps each chunk range.
    pub fn map_chunks<T, F>(self, n: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, Range<usize>) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        let count = n.div_ceil(chunk);
        self.map(0..count, |c| f(c, c * chunk..((c + 1) * chunk).min(n)))
    }

    /// Deterministic sum of `f(i)` over `0..n`.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        self.map_chunks(n, CHUNK, |_, r| r.map(&f).sum::<f64>())
            .into_iter()
            .sum()
    }
}
