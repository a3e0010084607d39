//! Parallel or sequential fan-out over independent jobs.
//!
//! Results always come back in job order, so aggregates do not depend on the
//! execution mode. Without the `parallel` feature, [`Execution::Parallel`]
//! runs sequentially.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Runs `f` over `jobs` and returns the results in input order.
pub fn map<T, R, F>(exec: Execution, jobs: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.into_par_iter().map(f).collect()
        }
        _ => jobs.into_iter().map(f).collect(),
    }
}
