use bragg_core::experiments::Executor;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{CliError, CliResult};

/// Executor backed by a dedicated rayon pool.
pub struct Rayon {
    pool: ThreadPool,
}

impl Rayon {
    /// `None` lets rayon pick the number of threads.
    pub fn new(threads: Option<usize>) -> CliResult<Self> {
        let mut builder = ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t);
        }
        let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
        Ok(Rayon { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Rayon {
    fn map<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..len).into_par_iter().map(f).collect())
    }
}
