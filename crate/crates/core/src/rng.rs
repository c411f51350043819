//! Reproducible random streams for replica ensembles.
//!
//! Every replica draws from its own ChaCha8 stream: the key is expanded from
//! the master seed and the replica index selects the 64-bit stream id, so the
//! mapping `(master_seed, index) -> stream` is injective and independent of
//! how replicas are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ReplicaRng = ChaCha8Rng;

/// Generator for replica `index` under `master_seed`.
pub fn seed_stream(master_seed: u64, index: u64) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Runs `count` replicas, each with its own stream, and returns the results
/// ordered by replica index.
///
/// `threads = Some(k)` runs on a dedicated pool of `k` workers; `None` uses
/// the global pool. Results never depend on the thread count.
pub fn run_replicas<T, F>(count: usize, master_seed: u64, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ReplicaRng) -> T + Sync + Send,
{
    let job = |i: usize| {
        let mut rng = seed_stream(master_seed, i as u64);
        f(i, &mut rng)
    };
    run_indexed(count, threads, job)
}

#[cfg(feature = "parallel")]
fn run_indexed<T, F>(count: usize, threads: Option<usize>, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match threads {
        Some(1) => (0..count).map(job).collect(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map(|pool| pool.install(|| (0..count).into_par_iter().map(&job).collect()))
            .unwrap_or_else(|_| (0..count).map(&job).collect()),
        None => (0..count).into_par_iter().map(job).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_indexed<T, F>(count: usize, _threads: Option<usize>, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(job).collect()
}
