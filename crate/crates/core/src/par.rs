//! Data-parallel helpers.
//!
//! Every helper here has the same signature with and without the `parallel`
//! feature. Only element-wise maps are parallelized; reductions are left to
//! callers and run sequentially so that floating-point sums do not depend on
//! how work was split.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many output elements, row-wise kernels stay on the calling thread.
pub const ROW_THRESHOLD: usize = 4096;

/// Maps `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Fills `out[i] = f(i)`, in parallel when the slice is long enough.
#[cfg(feature = "parallel")]
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if out.len() >= ROW_THRESHOLD {
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    } else {
        fill_seq(out, f);
    }
}

#[cfg(not(feature = "parallel"))]
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    fill_seq(out, f);
}

/// Sequential reference for [`fill`].
pub fn fill_seq<T, F>(out: &mut [T], f: F)
where
    F: Fn(usize) -> T,
{
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// Whether this build was compiled with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Worker threads available to [`map`] and [`fill`].
#[cfg(feature = "parallel")]
pub fn thread_count() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
pub fn thread_count() -> usize {
    1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let ys = map(&xs, |x| x * x);
        assert!(ys.iter().enumerate().all(|(i, &y)| y == (i * i) as u64));
    }

    #[test]
    fn fill_matches_sequential() {
        let mut a = vec![0.0f64; 10_000];
        let mut b = vec![0.0f64; 10_000];
        fill(&mut a, |i| (i as f64).sin());
        fill_seq(&mut b, |i| (i as f64).sin());
        assert_eq!(a, b);
    }
}
