//! Worker pools and order-preserving parallel maps.
//!
//! Every Monte Carlo quantity is a function of counter-keyed random streams,
//! so each work item is computed identically on any thread. Results are
//! collected in index order and reduced sequentially afterwards, which makes
//! every aggregate bit-identical for all pool sizes.

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};
use crate::fft::FftConvolver;

/// Environment variable consulted when no explicit thread count is given.
pub const THREADS_ENV: &str = "ITERINT_THREADS";

/// Resolves the worker count: explicit value, then `ITERINT_THREADS`, then
/// the available hardware parallelism.
pub fn resolve_threads(explicit: Option<usize>) -> Result<usize> {
    if let Some(n) = explicit {
        return if n == 0 { Err(Error::Usage("--threads must be at least 1".into())) } else { Ok(n) };
    }
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Usage(format!("{THREADS_ENV}={v} is not a positive integer"))),
        };
    }
    Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// A dedicated rayon pool.
pub struct Pool {
    inner: ThreadPool,
    threads: usize,
}

impl std::fmt::Debug for Pool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pool").field("threads", &self.threads).finish()
    }
}

impl Pool {
    pub fn new(threads: usize) -> Result<Self> {
        let inner = ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Usage(format!("cannot build a pool of {threads} threads: {e}")))?;
        Ok(Pool { inner, threads: threads.max(1) })
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// `f(conv, i)` for `i in 0..n`, returned in index order. Each worker
    /// owns one [`FftConvolver`].
    pub fn map<T, F>(&self, n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut FftConvolver, u64) -> T + Sync + Send,
    {
        self.inner.install(|| (0..n).into_par_iter().map_init(FftConvolver::new, |c, i| f(c, i)).collect())
    }

    /// Fallible variant of [`Pool::map`]; the first error in index order wins.
    pub fn try_map<T, F>(&self, n: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut FftConvolver, u64) -> Result<T> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}
