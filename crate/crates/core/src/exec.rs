//! Order-preserving map over a batch of independent jobs.
//!
//! With the `parallel` feature the batch is spread over the rayon pool that
//! is current at the call site; without it [`Executor::Parallel`] runs
//! sequentially. Either way the output order matches the input order, so
//! downstream reductions see the same sequence.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Executor {
    Sequential,
    #[default]
    Parallel,
}

impl Executor {
    /// Whether this build can actually run jobs concurrently.
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(executor: Executor, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match executor {
        Executor::Sequential => items.iter().map(f).collect(),
        Executor::Parallel => items.par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(_executor: Executor, items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
