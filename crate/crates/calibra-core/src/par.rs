//! Data-parallel helpers. With the `parallel` feature (default) the indexed
//! maps fan out over rayon; without it they run sequentially. Work is always
//! split by index with per-index RNG streams, so results are bit-identical
//! across thread counts and with the feature disabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Caps the worker pool from the CALIBRA_THREADS environment variable.
/// No-op when the variable is unset, unparsable, or the pool already exists.
pub fn configure_threads_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("CALIBRA_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
            }
        }
    }
}

/// Maps `f` over `0..count`, in parallel when available.
pub fn indexed_map<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Always-sequential variant, kept for direct comparison in benches.
pub fn indexed_map_seq<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}
