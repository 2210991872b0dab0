//! Execution helpers: data-parallel with the `parallel` feature, plain loops
//! without it. All callers rely on the results being independent of the
//! scheduling, so reductions here must be associative and order-insensitive.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `0..n` and collect results in index order.
pub(crate) fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
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

/// Map `0..n` to partial results and fold them with an associative,
/// commutative combine.
pub(crate) fn reduce_range<T, F, R>(n: usize, identity: T, map: F, combine: R) -> T
where
    T: Send + Clone + Sync,
    F: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        let seed = identity;
        (0..n)
            .into_par_iter()
            .map(map)
            .reduce(|| seed.clone(), combine)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(map).fold(identity, combine)
    }
}

/// Map `0..n` to vectors of findings and concatenate them in index order.
pub(crate) fn flat_map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> Vec<T> + Sync + Send,
{
    let chunks = map_range(n, f);
    let mut out = Vec::new();
    for c in chunks {
        out.extend(c);
    }
    out
}
