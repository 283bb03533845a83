//! Worker pool. Parallel maps return results in input order, and every task
//! draws from its own seeded stream, so output does not depend on `--jobs`.

use rayon::prelude::*;

use crate::error::{CliError, Result};

pub fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

/// Ordered parallel map with early error propagation.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> Result<U> + Sync,
{
    items.par_iter().enumerate().map(|(k, t)| f(k, t)).collect()
}

/// `par_map` over `0..n`.
pub fn par_range<U, F>(n: usize, f: F) -> Result<Vec<U>>
where
    U: Send,
    F: Fn(usize) -> Result<U> + Sync,
{
    (0..n).into_par_iter().map(&f).collect()
}
