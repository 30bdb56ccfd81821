//! Data-parallel helpers. With the `parallel` feature, large maps run on the
//! rayon pool; without it every path is sequential.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps shorter than this stay sequential under [`Execution::Auto`].
pub const PAR_THRESHOLD: usize = 8192;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    /// Parallel for large inputs when the feature is enabled.
    #[default]
    Auto,
    Sequential,
    /// Parallel whenever the feature is enabled.
    Parallel,
}

impl Execution {
    pub fn is_parallel(self, len: usize) -> bool {
        cfg!(feature = "parallel")
            && match self {
                Execution::Auto => len >= PAR_THRESHOLD,
                Execution::Sequential => false,
                Execution::Parallel => true,
            }
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel(n) {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Maps every item of a slice; used for independent runs, so `Auto` always
/// parallelizes when the feature is on.
pub fn map_items<I, T, F>(items: &[I], exec: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec != Execution::Sequential {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maximum of `f(i)` over `0..n` (`-inf` for an empty range).
pub fn max_range<F>(n: usize, exec: Execution, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel(n) {
        return (0..n)
            .into_par_iter()
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max);
    }
    let _ = exec;
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}
