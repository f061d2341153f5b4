//! Grid execution: a bounded worker pool when the `parallel` feature is
//! enabled, a plain loop otherwise. Results always come back in index order.

/// Number of workers to use when the caller does not specify one.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Evaluates `f(0..n)` and returns the results ordered by index.
///
/// `workers == 1` (or a build without the `parallel` feature) runs serially
/// on the calling thread.
pub fn map_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers > 1 && n > 1 {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => return pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                Err(_) => return (0..n).map(f).collect(),
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
    (0..n).map(f).collect()
}

/// Whether this build can actually run points concurrently.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
