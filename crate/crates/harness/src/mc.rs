//! Path-parallel Monte Carlo with a deterministic reduction order.

use rayon::prelude::*;

use crate::error::{HarnessError, Result};

/// Evaluates `f(0..n)` on `workers` threads and returns the results in index
/// order, so any later reduction is independent of the worker count.
pub fn map_paths<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if workers == 0 {
        return Err(HarnessError::Usage("--workers must be at least 1".into()));
    }
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Usage(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}
