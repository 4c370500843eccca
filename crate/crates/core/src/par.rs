//! Execution strategy for the data-parallel loops.
//!
//! Every hot loop in the crate goes through these helpers so that the same
//! code path can be driven sequentially or on the rayon pool. Without the
//! `parallel` feature, [`Exec::Parallel`] silently degrades to sequential.
//!
//! All reductions used here are over integer counts or over maps whose merge
//! is associative and commutative, so results do not depend on the strategy
//! or on the number of worker threads.

/// How a batch loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Order-preserving map over a slice.
pub fn map<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Fold chunks of `items` into partial accumulators and merge them.
///
/// `merge` must be associative and commutative for the result to be
/// independent of how the input is split.
pub fn fold_merge<T, A, I, F, M>(exec: Exec, items: &[T], init: I, fold: F, merge: M) -> A
where
    T: Sync,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, &T) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().fold(&init, &fold).reduce(&init, &merge);
    }
    let _ = (exec, &merge);
    items.iter().fold(init(), fold)
}

/// Stable sort, parallel when requested.
pub fn sort_by<T, F>(exec: Exec, items: &mut [T], cmp: F)
where
    T: Send,
    F: Fn(&T, &T) -> std::cmp::Ordering + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        items.par_sort_by(cmp);
        return;
    }
    let _ = exec;
    items.sort_by(cmp);
}

/// Run `f` on a dedicated pool with `workers` threads (0 = rayon default).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if workers > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        f()
    }
}
