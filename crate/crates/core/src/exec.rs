//! Executor abstraction over batch loops.
//!
//! Replications are independent work units keyed by index; results must come
//! back in index order no matter how the work was scheduled.  The core crate
//! ships only the sequential executor; a std front end can provide a thread
//! pool (e.g. rayon) by implementing [`Executor`] — determinism is preserved
//! because each job derives its own RNG stream from its index and the
//! collected output is ordered by index, not by completion.

use alloc::vec::Vec;

/// Runs `count` independent jobs and returns their results in index order.
pub trait Executor: Sync {
    fn map_indexed<T: Send>(&self, count: u32, job: &(dyn Fn(u32) -> T + Sync)) -> Vec<T>;
}

/// Single-threaded executor; the default in `no_std` contexts.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T: Send>(&self, count: u32, job: &(dyn Fn(u32) -> T + Sync)) -> Vec<T> {
        (0..count).map(job).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_preserves_index_order() {
        let out = Sequential.map_indexed(5, &|i| i * 10);
        assert_eq!(out, vec![0, 10, 20, 30, 40]);
    }

    #[test]
    fn zero_jobs_yield_empty_output() {
        let out: Vec<u32> = Sequential.map_indexed(0, &|i| i);
        assert!(out.is_empty());
    }
}
