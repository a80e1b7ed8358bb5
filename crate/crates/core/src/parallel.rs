//! Worker-count control for the per-sphere batch solvers.

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "LSMAT_THREADS";

/// Runs `f` inside a dedicated rayon pool of `threads` workers
/// (`None` or `0` uses the global pool).
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("failed to build worker pool")
            .install(f),
        _ => f(),
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}
