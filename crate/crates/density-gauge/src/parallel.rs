//! Thread-count policy and round-parallel versions of the quadratic
//! estimators. Rounds run in parallel; their results are folded in input
//! order, so the output equals the serial one.

use density_gauge_core::cover::ApproxFactor;
use density_gauge_core::naive::{evaluate_round, round_candidates, RoundFold};
use density_gauge_core::{DensityEstimate, Segment};
use rayon::prelude::*;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "DENSITY_GAUGE_THREADS";

/// Threads to use: the environment variable if set to a positive integer,
/// else `flag`, else the available parallelism.
pub fn thread_count(flag: Option<usize>) -> usize {
    let env = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok());
    resolve_threads(env, flag)
}

fn resolve_threads(env: Option<usize>, flag: Option<usize>) -> usize {
    env.filter(|&t| t > 0)
        .or(flag.filter(|&t| t > 0))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

/// [`density_gauge_core::naive::approx_density`] with rounds spread over the
/// current rayon pool.
pub fn approx_density(segments: &[Segment], factor: ApproxFactor, eps: f64) -> DensityEstimate {
    let rounds: Vec<_> = segments
        .par_iter()
        .map(|s| evaluate_round(s, &round_candidates(segments, s, eps), factor, eps))
        .collect();
    let mut fold = RoundFold::new(segments, factor.value(), eps);
    for (s, round) in segments.iter().zip(rounds) {
        fold.offer(s, round);
    }
    fold.finish()
}
