//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper preserves input order in its output, so results do not
//! depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f` on `0..n` and collects the results in index order.
pub fn map_indices<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Applies `f` to each element mutably.
pub fn for_each_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(&mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter_mut().for_each(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter_mut().for_each(f)
    }
}

/// Like [`map_indices`] but short-circuits on the first error in index order.
pub fn try_map_indices<R, E, F>(n: usize, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(usize) -> Result<R, E> + Sync + Send,
{
    map_indices(n, f).into_iter().collect()
}

/// Runs `f` on a pool of `threads` workers. Without the `parallel`
/// feature everything is sequential already and `threads` is ignored.
pub fn with_threads<R, F>(threads: usize, f: F) -> crate::Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| crate::Error::invalid(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(f())
    }
}

/// Worker count of the ambient pool (1 when sequential).
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v = map_indices(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn try_map_reports_first_error() {
        let r: Result<Vec<usize>, usize> =
            try_map_indices(100, |i| if i % 10 == 7 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(7));
    }

    #[test]
    fn single_thread_pool_runs() {
        let n = with_threads(1, current_threads).unwrap();
        assert_eq!(n, 1);
    }
}
