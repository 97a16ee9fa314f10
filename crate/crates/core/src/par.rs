use rayon::prelude::*;

// Below this length the rayon split costs more than it saves.
const MIN_PAR_LEN: usize = 4096;

/// Writes `out[i] = f(i)` for every coordinate. Coordinates are independent,
/// so the result is identical whether or not the fill runs in parallel.
pub(crate) fn fill<F>(out: &mut [f64], parallel: bool, f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    if parallel && out.len() >= MIN_PAR_LEN {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, o)| *o = f(i));
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }
}

/// Runs `job` on a dedicated pool when more than one thread is requested.
pub(crate) fn with_threads<T: Send>(threads: usize, job: impl FnOnce(bool) -> T + Send) -> T {
    if threads <= 1 {
        return job(false);
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| job(true)),
        Err(_) => job(false),
    }
}

/// Squared Euclidean norm, accumulated in index order.
pub(crate) fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}
