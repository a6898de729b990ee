//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction here uses a fixed binary tree over the input index
//! range, so results are bit-identical whatever the number of worker
//! threads (or with the `parallel` feature disabled).

/// Leaves of the summation tree hold at most this many terms.
const LEAF: usize = 64;

/// Below this many terms the tree is walked on the calling thread.
#[cfg(feature = "parallel")]
const SPLIT_PARALLEL: usize = 1 << 14;

/// Pairwise sum of `terms(i)` for `i in 0..n` over a fixed tree.
pub fn tree_sum<F>(n: usize, terms: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    tree_sum_range(0, n, &terms)
}

fn tree_sum_range<F>(lo: usize, hi: usize, terms: &F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += terms(i);
        }
        return acc;
    }
    let mid = lo + len / 2;
    #[cfg(feature = "parallel")]
    {
        if len >= SPLIT_PARALLEL {
            let (a, b) = rayon::join(
                || tree_sum_range(lo, mid, terms),
                || tree_sum_range(mid, hi, terms),
            );
            return a + b;
        }
    }
    tree_sum_range(lo, mid, terms) + tree_sum_range(mid, hi, terms)
}

/// Pairwise sum of a slice.
pub fn sum(values: &[f64]) -> f64 {
    tree_sum(values.len(), |i| values[i])
}

/// `(0..n).map(f).collect()`, evaluated in parallel when enabled.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible variant of [`map_indexed`]; the first error by index wins.
pub fn try_map_indexed<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, f).into_iter().collect()
}

/// Maximum over `0..n`; NaN-free inputs assumed. Returns 0 for `n == 0`.
pub fn max_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_indexed(n, f).into_iter().fold(0.0, f64::max)
}
