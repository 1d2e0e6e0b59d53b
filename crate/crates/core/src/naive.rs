//! Quadratic reference estimators and the exact brute-force oracle.
//!
//! Each segment `s` runs one *round*: balls of radius `|s|` drawn from a cover
//! around `s` are scored against the segments long enough to count for them.
//! Restricting radii to segment lengths loses nothing. Growing an optimal ball
//! to the length of the shortest segment it meets keeps every intersection.

use alloc::vec::Vec;

use crate::cover::{relevant_balls, ApproxFactor};
use crate::error::DensityError;
use crate::estimate::DensityEstimate;
use crate::geometry::{
    build_qs, count_intersecting, dist_segment_segment, length_admits, segment_intersection,
    segment_intersects_ball, segment_intersects_rect, Ball, Point, Segment,
};

/// Largest input the oracle accepts.
pub const ORACLE_CAP: usize = 500;
/// Smallest lattice the oracle accepts.
pub const MIN_GRID_RESOLUTION: usize = 50;

/// `S'` of a round: segments at least as long as `s` (within `eps`) meeting `Q_s`.
pub fn round_candidates(segments: &[Segment], s: &Segment, eps: f64) -> Vec<Segment> {
    let r = s.length();
    let q = build_qs(s).to_rect();
    segments
        .iter()
        .filter(|t| length_admits(t.length(), r, eps) && segment_intersects_rect(t, &q, eps * r))
        .copied()
        .collect()
}

/// First ball of maximum count, or `None` when no ball meets any candidate.
pub fn best_ball(balls: &[Ball], candidates: &[Segment], eps: f64) -> Option<(u32, Ball)> {
    let mut best: Option<(u32, Ball)> = None;
    for ball in balls {
        let count = count_intersecting(candidates, ball, eps) as u32;
        if count > 0 && best.is_none_or(|(c, _)| count > c) {
            best = Some((count, *ball));
            if count as usize == candidates.len() {
                break;
            }
        }
    }
    best
}

/// Scores the `factor` cover of `s` against `candidates`.
pub fn evaluate_round(
    s: &Segment,
    candidates: &[Segment],
    factor: ApproxFactor,
    eps: f64,
) -> Option<(u32, Ball)> {
    if candidates.is_empty() {
        return None;
    }
    best_ball(&relevant_balls(s, factor), candidates, eps)
}

/// Folds per-round results, taken in round order, into an estimate.
///
/// A round that beats the running maximum has its ball re-counted against all
/// of `segments`, so a reported witness always meets exactly `value` segments.
pub struct RoundFold<'a> {
    segments: &'a [Segment],
    eps: f64,
    estimate: DensityEstimate,
}

impl<'a> RoundFold<'a> {
    pub fn new(segments: &'a [Segment], factor: u32, eps: f64) -> Self {
        RoundFold {
            segments,
            eps,
            estimate: DensityEstimate::empty(factor),
        }
    }

    pub fn best(&self) -> u32 {
        self.estimate.value
    }

    pub fn offer(&mut self, s: &Segment, round: Option<(u32, Ball)>) {
        if let Some((count, ball)) = round {
            if count > self.estimate.value {
                let full = count_intersecting(self.segments, &ball, self.eps) as u32;
                self.estimate.value = full.max(count);
                self.estimate.witness = Some(ball);
                self.estimate.witness_segment_id = Some(s.id());
            }
        }
    }

    pub fn finish(self) -> DensityEstimate {
        self.estimate
    }
}

/// The quadratic `factor`-approximation: every segment runs its round, in
/// input order.
pub fn approx_density(segments: &[Segment], factor: ApproxFactor, eps: f64) -> DensityEstimate {
    let mut fold = RoundFold::new(segments, factor.value(), eps);
    for s in segments {
        let cands = round_candidates(segments, s, eps);
        fold.offer(s, evaluate_round(s, &cands, factor, eps));
    }
    fold.finish()
}

/// [`approx_density`] with the factor given as an integer.
pub fn approx_density_k(
    segments: &[Segment],
    factor: u32,
    eps: f64,
) -> Result<DensityEstimate, DensityError> {
    Ok(approx_density(
        segments,
        ApproxFactor::try_from(factor)?,
        eps,
    ))
}

/// Exact density λ by exhaustive candidate search.
///
/// For every round the candidate centres are a `grid_resolution²` lattice over
/// `Q_s`, endpoints, midpoints, pairwise intersections, and every pairwise
/// vertex of the arrangement of radius-`|s|` stadium boundaries around the
/// nearby segments. The deepest point of an arrangement of closed convex
/// regions is one of these, so the result is exact up to `eps`.
pub fn oracle_density(
    segments: &[Segment],
    grid_resolution: usize,
    eps: f64,
) -> Result<DensityEstimate, DensityError> {
    oracle(segments, None, grid_resolution, eps)
}

/// The largest count over balls that meet `segments[must_touch]` in the
/// density sense. `λ(S ∪ {s}) = max(λ(S), touching(S ∪ {s}, s))`, which makes
/// per-prefix oracles of a stream cheap.
pub fn oracle_density_touching(
    segments: &[Segment],
    must_touch: usize,
    grid_resolution: usize,
    eps: f64,
) -> Result<DensityEstimate, DensityError> {
    oracle(segments, Some(must_touch), grid_resolution, eps)
}

fn oracle(
    segments: &[Segment],
    must_touch: Option<usize>,
    grid_resolution: usize,
    eps: f64,
) -> Result<DensityEstimate, DensityError> {
    if segments.len() > ORACLE_CAP {
        return Err(DensityError::OracleCapExceeded {
            len: segments.len(),
            cap: ORACLE_CAP,
        });
    }
    if grid_resolution < MIN_GRID_RESOLUTION {
        return Err(DensityError::GridResolutionTooSmall(grid_resolution));
    }
    let must = must_touch.map(|i| segments[i]);
    let mut fold = RoundFold::new(segments, 1, eps);
    for s in segments {
        let r = s.length();
        let reach = 2.0 * r * (1.0 + eps);
        if let Some(m) = &must {
            if !length_admits(m.length(), r, eps) || dist_segment_segment(m, s) > reach {
                continue;
            }
        }
        let near: Vec<Segment> = segments
            .iter()
            .filter(|t| {
                length_admits(t.length(), r, eps)
                    && dist_segment_segment(t, s) <= reach
                    && must.is_none_or(|m| dist_segment_segment(t, &m) <= reach)
            })
            .copied()
            .collect();
        if near.len() as u32 <= fold.best() {
            continue;
        }
        let feasible = |c: Point| {
            let ball = Ball {
                center: c,
                radius: r,
            };
            segment_intersects_ball(s, &ball, eps)
                && must.is_none_or(|m| segment_intersects_ball(&m, &ball, eps))
        };
        let mut round: Option<(u32, Ball)> = None;
        let mut score = |c: Point| {
            if !feasible(c) {
                return;
            }
            let ball = Ball {
                center: c,
                radius: r,
            };
            let count = count_intersecting(&near, &ball, eps) as u32;
            if round.is_none_or(|(best, _)| count > best) {
                round = Some((count, ball));
            }
        };
        let q = build_qs(s);
        let step = q.side / grid_resolution as f64;
        for j in 0..grid_resolution {
            for i in 0..grid_resolution {
                score(Point::new(
                    q.min.x + (i as f64 + 0.5) * step,
                    q.min.y + (j as f64 + 0.5) * step,
                ));
            }
        }
        for t in &near {
            for p in single_candidates(t, r) {
                score(p);
            }
        }
        for (k, t) in near.iter().enumerate() {
            for u in &near[k + 1..] {
                if let Some(p) = segment_intersection(t, u) {
                    score(p);
                }
                pairwise_vertices(t, u, r, &mut score);
            }
        }
        fold.offer(s, round);
    }
    Ok(fold.finish())
}

/// Endpoints, midpoint and the extreme points of the stadium around `t`.
fn single_candidates(t: &Segment, r: f64) -> [Point; 9] {
    let (a, b) = (t.a(), t.b());
    let dir = (b - a) * (1.0 / t.length());
    let n = Point::new(-dir.y, dir.x) * r;
    [
        a,
        b,
        t.midpoint(),
        a + n,
        a - n,
        b + n,
        b - n,
        a - dir * r,
        b + dir * r,
    ]
}

/// The two boundary lines of a stadium, as segments offset by `±r`.
fn offset_lines(t: &Segment, r: f64) -> [(Point, Point); 2] {
    let dir = (t.b() - t.a()) * (1.0 / t.length());
    let n = Point::new(-dir.y, dir.x) * r;
    [(t.a() + n, t.b() + n), (t.a() - n, t.b() - n)]
}

fn pairwise_vertices(t: &Segment, u: &Segment, r: f64, score: &mut impl FnMut(Point)) {
    let lt = offset_lines(t, r);
    let lu = offset_lines(u, r);
    let ct = [t.a(), t.b()];
    let cu = [u.a(), u.b()];
    for &(p, q) in &lt {
        for &(v, w) in &lu {
            if let Some(x) = line_segment_crossing(p, q, v, w) {
                score(x);
            }
        }
        for &c in &cu {
            for x in segment_circle(p, q, c, r).into_iter().flatten() {
                score(x);
            }
        }
    }
    for &(v, w) in &lu {
        for &c in &ct {
            for x in segment_circle(v, w, c, r).into_iter().flatten() {
                score(x);
            }
        }
    }
    for &c in &ct {
        for &d in &cu {
            for x in circle_circle(c, d, r).into_iter().flatten() {
                score(x);
            }
        }
    }
}

fn line_segment_crossing(p: Point, q: Point, v: Point, w: Point) -> Option<Point> {
    let r = q - p;
    let s = w - v;
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let vp = v - p;
    let t = vp.cross(s) / denom;
    let u = vp.cross(r) / denom;
    let slack = 1e-12;
    ((-slack..=1.0 + slack).contains(&t) && (-slack..=1.0 + slack).contains(&u)).then(|| p + r * t)
}

/// Intersections of segment `p q` with the circle of radius `r` around `c`.
fn segment_circle(p: Point, q: Point, c: Point, r: f64) -> [Option<Point>; 2] {
    let d = q - p;
    let f = p - c;
    let a = d.norm2();
    let b = 2.0 * f.dot(d);
    let cc = f.norm2() - r * r;
    let disc = b * b - 4.0 * a * cc;
    if a == 0.0 || disc < 0.0 {
        return [None, None];
    }
    let sq = libm::sqrt(disc);
    let slack = 1e-12;
    [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
        .map(|t| (-slack..=1.0 + slack).contains(&t).then(|| p + d * t))
}

/// Intersections of two circles of equal radius `r`.
fn circle_circle(c: Point, d: Point, r: f64) -> [Option<Point>; 2] {
    let cd = d - c;
    let dist2 = cd.norm2();
    if dist2 == 0.0 || dist2 > 4.0 * r * r {
        return [None, None];
    }
    let mid = c.midpoint(d);
    let h = libm::sqrt((r * r - dist2 / 4.0).max(0.0));
    let n = Point::new(-cd.y, cd.x) * (h / libm::sqrt(dist2));
    [Some(mid + n), Some(mid - n)]
}
