//! Thread-pool executor with deterministic, index-ordered results.

use cadence_core::exec::Executor;
use rayon::iter::{IntoParallelIterator, ParallelIterator};

use crate::error::CliError;

/// Work-stealing executor over a dedicated pool.  Results are collected in
/// job-index order, so outputs are identical for any worker count.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// Builds a pool of exactly `workers` threads.
    pub fn new(workers: usize) -> Result<RayonExecutor, CliError> {
        if workers == 0 {
            return Err(CliError::Config("worker count must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("cadence-worker-{i}"))
            .build()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
        Ok(RayonExecutor { pool })
    }

    /// Worker-count resolution: explicit flag, then the `CADENCE_WORKERS`
    /// environment variable, then all available cores.
    pub fn resolve_workers(flag: Option<usize>) -> Result<usize, CliError> {
        if let Some(n) = flag {
            return Ok(n);
        }
        match std::env::var("CADENCE_WORKERS") {
            Ok(v) => v
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("CADENCE_WORKERS must be an integer, got {v:?}"))),
            Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
        }
    }
}

impl Executor for RayonExecutor {
    fn map_indexed<T: Send>(&self, count: u32, job: &(dyn Fn(u32) -> T + Sync)) -> Vec<T> {
        self.pool.install(|| (0..count).into_par_iter().map(job).collect())
    }
}
