//! Deterministic multi-worker Monte Carlo.
//!
//! Worker `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i` and
//! receives `budget / workers` samples, the first `budget % workers` workers
//! one more. Partial results come back in worker order, so merged totals
//! depend on `(seed, workers)` only.

use std::thread;

use bgcs_core::stats::{MeanAccumulator, VectorAccumulator};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

pub fn split_budget(budget: u64, workers: usize) -> Vec<u64> {
    let w = workers as u64;
    (0..w).map(|i| budget / w + u64::from(i < budget % w)).collect()
}

/// Runs `job(worker, rng, share)` on every worker and returns the results in
/// worker order.
pub fn run_workers<T, F>(seed: u64, workers: usize, budget: u64, job: F) -> bgcs_core::Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng, u64) -> bgcs_core::Result<T> + Sync,
{
    assert!(workers >= 1, "need at least one worker");
    let shares = split_budget(budget, workers);
    let job = &job;
    thread::scope(|scope| {
        let handles: Vec<_> = shares
            .iter()
            .enumerate()
            .map(|(i, &share)| {
                scope.spawn(move || {
                    let mut rng = worker_rng(seed, i);
                    job(i, &mut rng, share)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Accumulators that combine exactly.
pub trait Merge {
    fn merge_from(&mut self, other: &Self);
}

impl Merge for MeanAccumulator {
    fn merge_from(&mut self, other: &Self) {
        self.merge(other);
    }
}

impl Merge for VectorAccumulator {
    fn merge_from(&mut self, other: &Self) {
        self.merge(other);
    }
}

/// Folds partial results left to right.
pub fn merge_in_order<T: Merge>(parts: Vec<T>) -> Option<T> {
    let mut it = parts.into_iter();
    let mut total = it.next()?;
    for p in it {
        total.merge_from(&p);
    }
    Some(total)
}

/// [`run_workers`] followed by [`merge_in_order`].
pub fn accumulate<T, F>(seed: u64, workers: usize, budget: u64, job: F) -> bgcs_core::Result<T>
where
    T: Send + Merge,
    F: Fn(&mut ChaCha8Rng, u64) -> bgcs_core::Result<T> + Sync,
{
    let parts = run_workers(seed, workers, budget, |_, rng, n| job(rng, n))?;
    Ok(merge_in_order(parts).expect("at least one worker"))
}
