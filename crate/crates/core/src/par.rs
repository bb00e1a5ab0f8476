//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) independent work items are spread
//! over the rayon pool; without it every call runs on the calling thread.
//! [`Exec`] selects the path at run time so both can be compared in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

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

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Minimum of `f` over `items`; `+∞` for an empty slice.
pub fn min_f64<T, F>(exec: Exec, items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).reduce(|| f64::INFINITY, f64::min),
        _ => items.iter().map(f).fold(f64::INFINITY, f64::min),
    }
}

/// Maximum of `f` over `items`; `−∞` for an empty slice.
pub fn max_f64<T, F>(exec: Exec, items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    -min_f64(exec, items, |x| -f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = map(Exec::Sequential, &xs, |x| x * 2.0);
        let b = map(Exec::Parallel, &xs, |x| x * 2.0);
        assert_eq!(a, b);
        assert_eq!(
            min_f64(Exec::Sequential, &xs, |x| *x),
            min_f64(Exec::Parallel, &xs, |x| *x)
        );
        assert_eq!(max_f64(Exec::Parallel, &xs, |x| *x), xs.iter().cloned().fold(f64::MIN, f64::max));
    }

    #[test]
    fn empty_reductions() {
        let xs: [f64; 0] = [];
        assert_eq!(min_f64(Exec::default(), &xs, |x| *x), f64::INFINITY);
    }
}
