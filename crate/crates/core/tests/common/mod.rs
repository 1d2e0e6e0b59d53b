#![allow(dead_code)]

use density_gauge_core::{Point, Segment};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn seg(id: u32, ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
    Segment::new(id, Point::new(ax, ay), Point::new(bx, by)).unwrap()
}

/// `k` unit segments through `center` at evenly spaced angles.
pub fn star(k: u32, center: Point) -> Vec<Segment> {
    (0..k)
        .map(|i| {
            let d = Point::new(0.5, 0.0).rotated(i as f64 * std::f64::consts::PI / k as f64);
            Segment::new(i, center - d, center + d).unwrap()
        })
        .collect()
}

/// Random segments with lengths spread over two orders of magnitude in a
/// box that grows with `n`, so the density stays small.
pub fn random_sparse(rng: &mut ChaCha8Rng, n: usize) -> Vec<Segment> {
    let side = 4.0 * (n as f64).sqrt();
    (0..n as u32)
        .map(|id| {
            let a = Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
            let len = 10f64.powf(rng.gen_range(-1.0..1.0));
            let d = Point::new(len, 0.0).rotated(rng.gen_range(0.0..std::f64::consts::TAU));
            Segment::new(id, a, a + d).unwrap()
        })
        .collect()
}

/// Unit horizontal segments on a square lattice with spacing `gap`.
pub fn grid(n: usize, gap: f64) -> Vec<Segment> {
    let side = (n as f64).sqrt().ceil() as usize;
    (0..n)
        .map(|k| {
            let (i, j) = ((k % side) as f64, (k / side) as f64);
            seg(k as u32, gap * i, gap * j, gap * i + 1.0, gap * j)
        })
        .collect()
}
