//! Data-parallel helpers. With the `parallel` feature they fan out over
//! rayon's pool; without it they run sequentially. The `*_seq` variants
//! are always sequential so that both paths can be benchmarked from one
//! build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `f(0), f(1), ..., f(n - 1)` in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_range_seq(n, f)
    }
}

pub fn map_range_seq<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Maps over a slice, preserving order.
pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_slice_seq(items, f)
    }
}

pub fn map_slice_seq<A, T, F: Fn(&A) -> T>(items: &[A], f: F) -> Vec<T> {
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved() {
        let v = map_range(100, |i| i * 2);
        assert_eq!(v, map_range_seq(100, |i| i * 2));
        let s: Vec<u32> = (0..50).collect();
        assert_eq!(map_slice(&s, |x| x + 1), map_slice_seq(&s, |x| x + 1));
    }
}
