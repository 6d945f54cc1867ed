//! Experiment drivers. Each returns a report plus the hard checks it
//! verified; samples run on a worker pool and are merged by index.

pub mod metric_studies;
pub mod properties;
pub mod scalability;
pub mod search_space;

use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

/// Runs `f(0..n)` on `workers` threads (all cores when `None`); output is in
/// index order regardless of scheduling.
pub fn run_indexed<T, F>(n: usize, workers: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    match builder.build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_count_does_not_change_results() {
        let a = run_indexed(50, Some(1), |i| i * i);
        let b = run_indexed(50, Some(4), |i| i * i);
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
    }
}
