//! Sequential/parallel dispatch for embarrassingly parallel loops.
//!
//! Results are always collected in input order, so the execution mode never
//! changes what a sweep returns.

/// How a batch of independent evaluations is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Parallel when the `parallel` feature is enabled, sequential otherwise.
    #[default]
    Auto,
    Sequential,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        matches!(self, Execution::Auto) && cfg!(feature = "parallel")
    }
}

/// Map `f` over `items`, preserving order.
pub fn map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(&f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Map `f` over `0..n`, preserving order.
pub fn map_range<U, F>(exec: Execution, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(&f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map(Execution::Auto, &xs, |x| x * x);
        let b = map(Execution::Sequential, &xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(map_range(Execution::Auto, 17, |i| i), (0..17).collect::<Vec<_>>());
    }
}
