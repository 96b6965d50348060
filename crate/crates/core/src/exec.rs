//! Execution strategy for embarrassingly parallel evaluations.
//!
//! With the `parallel` feature the [`Execution::Parallel`] strategy runs on
//! the rayon pool; without it, it silently falls back to sequential
//! evaluation. Both strategies return results in input order, and every
//! evaluation is a pure function of its input, so output is identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether [`Execution::Parallel`] actually runs on multiple threads.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel => items.iter().map(f).collect(),
        }
    }
}

/// Size the global thread pool. Only the first call has any effect; later
/// calls (and calls without the `parallel` feature) return `false`.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree_and_preserve_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| x.wrapping_mul(2_654_435_761) % 9973;
        let a = Execution::Sequential.map(&xs, f);
        let b = Execution::Parallel.map(&xs, f);
        assert_eq!(a, b);
        assert_eq!(a[3], 3 * 2_654_435_761 % 9973);
    }
}
