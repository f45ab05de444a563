//! Rayon-backed evaluation that gives the same numbers as the sequential core functions.

use gtl_core::eval::{sat_table, LabeledSet};
use gtl_core::{Formula, Result, Trajectory};
use rayon::prelude::*;

/// Number of `(trajectory, node)` pairs satisfying `f` at time index 1, summed in parallel.
fn satisfied_counts(set: &[Trajectory], f: &Formula) -> Result<Vec<usize>> {
    set.par_iter()
        .map(|g| sat_table(g, f).map(|t| t.count_at_start()))
        .collect()
}

/// Same value as [`gtl_core::eval::coverage`].
pub fn coverage(set: &[Trajectory], f: &Formula) -> Result<f64> {
    if set.is_empty() {
        return Err(gtl_core::Error::EmptyDataset);
    }
    let total: usize = satisfied_counts(set, f)?.iter().sum();
    Ok(total as f64 / (set.len() * set[0].graph().node_count()) as f64)
}

/// Misclassification rates of many formulas, one task per formula.
pub fn misclassification_rates(data: &LabeledSet, fs: &[Formula]) -> Result<Vec<f64>> {
    fs.par_iter()
        .map(|f| gtl_core::eval::misclassification_rate(data, f))
        .collect()
}

/// Runs `op` on a pool with `workers` threads, or on the global pool when `workers` is 0.
pub fn with_workers<T: Send>(workers: usize, op: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return op();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(op),
        Err(e) => {
            log::warn!("cannot build a {workers}-thread pool ({e}); using the global pool");
            op()
        }
    }
}
