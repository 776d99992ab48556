//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction splits its index range into fixed-size chunks, folds each
//! chunk left to right and then combines the chunk partials in chunk order.
//! The parallel and sequential paths therefore perform the same floating-point
//! operations in the same order and produce bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per chunk in chunked reductions.
pub const CHUNK: usize = 64;

/// How a data-parallel loop is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is on; otherwise the
    /// same as [`Exec::Sequential`].
    #[default]
    Parallel,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `0..len`, returning results in index order.
pub fn map_indices<T, F>(len: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Folds `0..len` chunk by chunk and combines the partials in chunk order.
pub fn chunked_reduce<T, Id, Fold, Comb>(len: usize, exec: Exec, identity: Id, fold: Fold, combine: Comb) -> T
where
    T: Send,
    Id: Fn() -> T + Sync + Send,
    Fold: Fn(&mut T, usize) + Sync + Send,
    Comb: Fn(&mut T, T),
{
    let chunks = len.div_ceil(CHUNK);
    let partials = map_indices(chunks, exec, |c| {
        let mut acc = identity();
        let end = ((c + 1) * CHUNK).min(len);
        for i in c * CHUNK..end {
            fold(&mut acc, i);
        }
        acc
    });
    let mut total = identity();
    for p in partials {
        combine(&mut total, p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let seq = map_indices(1000, Exec::Sequential, |i| i * i);
        let par = map_indices(1000, Exec::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }

    #[test]
    fn reduction_is_bit_identical_across_modes() {
        let term = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (i as f64 + 1.0);
        let run = |exec| chunked_reduce(10_007, exec, || 0.0f64, |acc, i| *acc += term(i), |a, b| *a += b);
        assert_eq!(run(Exec::Sequential).to_bits(), run(Exec::Parallel).to_bits());
    }

    #[test]
    fn empty_range_gives_identity() {
        let s = chunked_reduce(0, Exec::Parallel, || 5.0f64, |acc, _| *acc += 1.0, |a, b| *a += b);
        assert_eq!(s, 5.0);
    }
}
