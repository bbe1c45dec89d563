//! Replicate-level execution.
//!
//! Replicates are independent: each one receives its index and derives its
//! own RNG stream. Results are always returned in replicate order, so the
//! reduction is identical whether replicates ran in parallel or not.

/// How replicates are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon data parallelism; `None` uses the global pool, `Some(n)` a
    /// dedicated pool with `n` worker threads.
    #[cfg(feature = "parallel")]
    Parallel(Option<usize>),
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Execution::Parallel(None)
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Execution with a given worker count; `Some(1)` or a build without the
    /// `parallel` feature runs sequentially.
    pub fn with_workers(workers: Option<usize>) -> Self {
        match workers {
            Some(0) | Some(1) => Execution::Sequential,
            #[cfg(feature = "parallel")]
            w => Execution::Parallel(w),
            #[cfg(not(feature = "parallel"))]
            _ => Execution::Sequential,
        }
    }
}

/// Evaluate `f(0..n)` and collect the results in index order.
pub fn map_replicates<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel(workers) => parallel::map(n, workers, f),
    }
}

#[cfg(feature = "parallel")]
mod parallel {
    use rayon::prelude::*;

    pub(super) fn map<T, F>(n: usize, workers: Option<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let run = || (0..n).into_par_iter().map(&f).collect::<Vec<T>>();
        match workers {
            None => run(),
            Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                Ok(pool) => pool.install(run),
                Err(_) => (0..n).map(&f).collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_replicates(100, Execution::Sequential, |i| i * i);
        let def = map_replicates(100, Execution::default(), |i| i * i);
        let four = map_replicates(100, Execution::with_workers(Some(4)), |i| i * i);
        assert_eq!(seq, def);
        assert_eq!(seq, four);
    }
}
