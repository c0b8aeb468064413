//! Execution policy for the data-parallel loops.
//!
//! With the `parallel` feature the helpers here fan work out over rayon;
//! without it (or inside [`sequential`]) they run in order on the calling
//! thread. Every helper maps independent items to independent outputs, so
//! results are bit-identical under either policy.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

/// Runs `f` with all library loops on the calling thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

/// True when the helpers below will actually fan out.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Runs `f` inside a rayon pool of `threads` workers. `Some(1)` or a build
/// without the `parallel` feature runs everything sequentially.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(1) => sequential(f),
        #[cfg(feature = "parallel")]
        Some(n) if n > 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

pub(crate) fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

pub(crate) fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Calls `f(chunk_index, chunk)` for consecutive `chunk_len`-sized pieces.
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk_len = chunk_len.max(1);
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    for (i, c) in data.chunks_mut(chunk_len).enumerate() {
        f(i, c);
    }
}
