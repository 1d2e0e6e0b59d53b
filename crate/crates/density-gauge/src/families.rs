//! Seeded synthetic inputs whose density is known or small.

use std::f64::consts::PI;

use density_gauge_core::{Point, Segment};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Spacing between neighbouring unit segments of [`grid`].
pub const GRID_GAP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Unit segments on a square lattice with spacing 10; density 1.
    Grid,
    /// Disjoint stars of `k` unit segments; density `k`.
    Star,
    /// Random segments of mixed lengths, sparse on average.
    Random,
}

impl Family {
    pub fn generate(self, n: usize, star_k: u32, rng: &mut ChaCha8Rng) -> Vec<Segment> {
        match self {
            Family::Grid => grid(n),
            Family::Star => stars(n, star_k),
            Family::Random => random_low_density(n, rng),
        }
    }
}

/// `n` horizontal unit segments, row by row on a `⌈√n⌉`-wide lattice.
pub fn grid(n: usize) -> Vec<Segment> {
    let side = (n as f64).sqrt().ceil().max(1.0) as usize;
    (0..n)
        .map(|k| {
            let p = Point::new(GRID_GAP * (k % side) as f64, GRID_GAP * (k / side) as f64);
            Segment::new(k as u32, p, p + Point::new(1.0, 0.0)).expect("unit segment")
        })
        .collect()
}

/// `k` unit segments through `center` at angles `iπ/k`; density exactly `k`.
pub fn star(k: u32, center: Point, first_id: u32) -> Vec<Segment> {
    (0..k)
        .map(|i| {
            let d = Point::new(0.5, 0.0).rotated(i as f64 * PI / k as f64);
            Segment::new(first_id + i, center - d, center + d).expect("unit segment")
        })
        .collect()
}

/// `n` segments grouped in stars of `k` on a lattice with spacing 10; the
/// last star may be partial.
pub fn stars(n: usize, k: u32) -> Vec<Segment> {
    let k = k.max(1) as usize;
    let count = n.div_ceil(k);
    let side = (count as f64).sqrt().ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n);
    for c in 0..count {
        let center = Point::new(GRID_GAP * (c % side) as f64, GRID_GAP * (c / side) as f64);
        let take = k.min(n - out.len());
        let mut s = star(k as u32, center, out.len() as u32);
        s.truncate(take);
        out.extend(s);
    }
    out
}

/// Segments with log-uniform lengths in `[0.1, 10)`, uniform directions and
/// start points uniform in a square of side `4√n`.
pub fn random_low_density(n: usize, rng: &mut ChaCha8Rng) -> Vec<Segment> {
    let side = 4.0 * (n.max(1) as f64).sqrt();
    (0..n as u32)
        .map(|id| {
            let a = Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
            let len = 10f64.powf(rng.gen_range(-1.0..1.0));
            let d = Point::new(len, 0.0).rotated(rng.gen_range(0.0..2.0 * PI));
            Segment::new(id, a, a + d).expect("positive length")
        })
        .collect()
}
