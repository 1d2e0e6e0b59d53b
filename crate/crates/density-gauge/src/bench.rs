//! Scaling measurements of the quadtree path, optionally against the
//! quadratic 3-approximation.

use std::time::{Duration, Instant};

use density_gauge_core::cover::ApproxFactor;
use density_gauge_core::naive;
use density_gauge_core::quadtree::DensityIndex;
use density_gauge_core::{DensityEstimate, Segment, DEFAULT_EPS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::AppError;
use crate::families::Family;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub family: Family,
    pub sizes: Vec<usize>,
    pub seed: u64,
    /// Timed runs per size; the median is reported.
    pub repeats: usize,
    pub star_k: u32,
    /// Also time the quadratic 3-approximation.
    pub naive: bool,
    pub omit_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub family: Family,
    pub n: usize,
    pub star_k: Option<u32>,
    /// Median build-and-estimate time of the quadtree path.
    pub wall_ms: Option<f64>,
    pub estimate: u32,
    pub canonical_squares: usize,
    pub nodes: usize,
    pub resident_list_total: usize,
    pub bytes_per_segment: f64,
    /// Largest retrieved candidate set over all rounds.
    pub max_candidates: usize,
    pub mean_candidates: f64,
    /// Median time of the quadratic 3-approximation, when requested.
    pub naive_ms: Option<f64>,
    pub naive_estimate: Option<u32>,
}

pub const CSV_HEADER: &str = "family,n,star_k,wall_ms,estimate,canonical_squares,nodes,\
resident_list_total,bytes_per_segment,max_candidates,mean_candidates,naive_ms,naive_estimate";

impl BenchRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{:.1},{},{:.3},{},{}",
            serde_json::to_value(self.family).unwrap().as_str().unwrap(),
            self.n,
            opt(self.star_k.map(|k| k.to_string())),
            opt(self.wall_ms.map(|t| format!("{t:.3}"))),
            self.estimate,
            self.canonical_squares,
            self.nodes,
            self.resident_list_total,
            self.bytes_per_segment,
            self.max_candidates,
            self.mean_candidates,
            opt(self.naive_ms.map(|t| format!("{t:.3}"))),
            opt(self.naive_estimate.map(|v| v.to_string())),
        )
    }
}

/// Build plus estimate of the quadtree path.
pub fn time_fast(segments: &[Segment]) -> Result<(Duration, DensityIndex), AppError> {
    let start = Instant::now();
    let idx = DensityIndex::build(segments)?;
    Ok((start.elapsed(), idx))
}

/// The quadratic 3-approximation, single-threaded.
pub fn time_naive(segments: &[Segment]) -> (Duration, DensityEstimate) {
    let start = Instant::now();
    let e = naive::approx_density(segments, ApproxFactor::Three, DEFAULT_EPS);
    (start.elapsed(), e)
}

pub fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

pub fn run(config: &BenchConfig) -> Result<Vec<BenchRow>, AppError> {
    if config.repeats == 0 || config.sizes.is_empty() {
        return Err(AppError::Usage(
            "bench needs at least one size and one repeat".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::new();
    for &n in &config.sizes {
        let segments = config.family.generate(n, config.star_k, &mut rng);
        let mut fast = Vec::new();
        let mut naive_times = Vec::new();
        let mut last = None;
        let mut naive_estimate = None;
        for _ in 0..config.repeats {
            let (t, idx) = time_fast(&segments)?;
            fast.push(t);
            last = Some(idx);
            if config.naive {
                let (t, e) = time_naive(&segments);
                naive_times.push(t);
                naive_estimate = Some(e.value);
            }
        }
        let idx = last.expect("at least one repeat");
        let stats = idx.stats();
        let counts = idx.candidate_counts();
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        let timing =
            |v: Vec<Duration>| (!config.omit_timing && !v.is_empty()).then(|| ms(median(v)));
        rows.push(BenchRow {
            family: config.family,
            n,
            star_k: (config.family == Family::Star).then_some(config.star_k),
            wall_ms: timing(fast),
            estimate: idx.estimate().value,
            canonical_squares: stats.canonical_squares,
            nodes: stats.nodes,
            resident_list_total: stats.resident_list_total,
            bytes_per_segment: stats.approx_bytes as f64 / n.max(1) as f64,
            max_candidates: counts.iter().copied().max().unwrap_or(0),
            mean_candidates: counts.iter().sum::<usize>() as f64 / n.max(1) as f64,
            naive_ms: timing(naive_times),
            naive_estimate,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_candidates_grow_with_k() {
        let run_k = |k| {
            let config = BenchConfig {
                family: Family::Star,
                sizes: vec![240],
                seed: 1,
                repeats: 1,
                star_k: k,
                naive: false,
                omit_timing: true,
            };
            run(&config).unwrap().remove(0)
        };
        let (a, b) = (run_k(6), run_k(12));
        assert_eq!(a.max_candidates, 6);
        assert_eq!(b.max_candidates, 12);
        assert!(a.wall_ms.is_none());
        assert!((3..=12).contains(&b.estimate));
    }

    #[test]
    fn rows_repeat_without_timing() {
        let config = BenchConfig {
            family: Family::Random,
            sizes: vec![50, 100],
            seed: 8,
            repeats: 2,
            star_k: 1,
            naive: true,
            omit_timing: true,
        };
        let a = run(&config).unwrap();
        assert_eq!(a, run(&config).unwrap());
        assert_eq!(
            a[1].to_csv().split(',').count(),
            CSV_HEADER.split(',').count()
        );
    }
}
