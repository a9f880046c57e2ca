use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use strkern_core::Executor;

use crate::error::{CliError, Result};

/// Row executor backed by a dedicated rayon pool.
pub struct PoolExecutor {
    pool: ThreadPool,
}

impl PoolExecutor {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for PoolExecutor {
    fn for_each_row(&self, data: &mut [f64], cols: usize, f: &(dyn Fn(usize, &mut [f64]) + Sync)) {
        if cols == 0 {
            return;
        }
        self.pool.install(|| data.par_chunks_mut(cols).enumerate().for_each(|(i, row)| f(i, row)));
    }
}
