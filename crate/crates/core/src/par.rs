//! Data-parallel helpers with a sequential fallback.
//!
//! Built with the `parallel` feature (the default) these dispatch to rayon;
//! without it they run plain sequential loops. Results are identical either
//! way: `find_map_first` keeps first-index-wins semantics under parallelism.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..len` and collects the results in index order.
pub fn map_indexed<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Returns the first (lowest-index) `Some` produced by `f`, short-circuiting
/// the rest of the range once a hit is known.
pub fn find_map_first<R, F>(len: usize, f: F) -> Option<R>
where
    R: Send,
    F: Fn(usize) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().find_map_first(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).find_map(f)
    }
}

/// Whether this build runs the rayon path.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_map_first_picks_lowest_index() {
        let hit = find_map_first(1000, |i| if i % 17 == 3 { Some(i) } else { None });
        assert_eq!(hit, Some(3));
    }

    #[test]
    fn map_indexed_preserves_order() {
        let v = map_indexed(64, |i| i * i);
        assert_eq!(v[10], 100);
        assert_eq!(v.len(), 64);
    }
}
