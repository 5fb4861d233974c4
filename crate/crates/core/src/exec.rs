//! Data-parallel execution policy.
//!
//! Inner loops that are independent across rows (funny matrix products,
//! clique marginals, synchronous message updates, benchmark trials) go through
//! [`Execution`]. With the `parallel` feature disabled every policy runs
//! sequentially, so results never depend on the feature set.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this policy actually fans out to a thread pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f(i)` for `i in 0..n` and collects the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Like [`Execution::map`], but each worker owns a scratch value built by `init`.
    pub fn map_init<T, S, I, F>(self, n: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map_init(&init, |s, i| f(s, i)).collect();
        }
        let mut scratch = init();
        (0..n).map(|i| f(&mut scratch, i)).collect()
    }

    /// Fills consecutive `chunk`-sized pieces of `out`; `f` receives the chunk index.
    pub fn for_each_chunk<T, S, I, F>(self, out: &mut [T], chunk: usize, init: I, f: F)
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each_init(&init, |s, (i, c)| f(s, i, c));
            return;
        }
        let mut scratch = init();
        for (i, c) in out.chunks_mut(chunk).enumerate() {
            f(&mut scratch, i, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let seq = Execution::Sequential.map(100, |i| i * i);
        let par = Execution::Parallel.map(100, |i| i * i);
        assert_eq!(seq, par);

        let mut a = vec![0usize; 37];
        let mut b = vec![0usize; 37];
        Execution::Sequential.for_each_chunk(&mut a, 5, || (), |_, ci, c| {
            for (j, x) in c.iter_mut().enumerate() {
                *x = ci * 5 + j;
            }
        });
        Execution::Parallel.for_each_chunk(&mut b, 5, || (), |_, ci, c| {
            for (j, x) in c.iter_mut().enumerate() {
                *x = ci * 5 + j;
            }
        });
        assert_eq!(a, b);
        assert_eq!(a, (0..37).collect::<Vec<_>>());
    }
}
