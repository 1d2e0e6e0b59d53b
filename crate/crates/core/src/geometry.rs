//! Planar primitives and the density-sense intersection predicate.
//!
//! A segment *intersects* a ball (in the density sense) when it is at least as
//! long as the radius and meets the closed ball; a single contact point counts.
//! Every `≤`/`≥` comparison is widened by `eps` relative to the larger of the
//! two magnitudes involved.

use core::ops::{Add, Mul, Sub};

use crate::error::GeometryError;

/// Relative tolerance used by the predicates unless a caller overrides it.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn dist2(self, o: Point) -> f64 {
        (self - o).norm2()
    }

    pub fn midpoint(self, o: Point) -> Point {
        Point::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    /// Counter-clockwise rotation by `angle` radians about the origin.
    pub fn rotated(self, angle: f64) -> Point {
        if angle == 0.0 {
            return self;
        }
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// A directed segment `a → b` with its length cached.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Segment {
    id: u32,
    a: Point,
    b: Point,
    length: f64,
}

impl Segment {
    /// Rejects non-finite coordinates and zero-length segments.
    pub fn new(id: u32, a: Point, b: Point) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let length = a.dist(b);
        if !(length > 0.0) || !length.is_finite() {
            return Err(GeometryError::ZeroLength { id });
        }
        Ok(Segment { id, a, b, length })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn a(&self) -> Point {
        self.a
    }

    pub fn b(&self) -> Point {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn midpoint(&self) -> Point {
        self.a.midpoint(self.b)
    }

    pub fn with_id(mut self, id: u32) -> Self {
        self.id = id;
        self
    }

    /// Applies `f` to both endpoints, keeping the id.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<Self, GeometryError> {
        Segment::new(self.id, f(self.a), f(self.b))
    }

    pub fn bounding_rect(&self) -> AxisRect {
        AxisRect {
            min: Point::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y)),
            max: Point::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(radius > 0.0) {
            return Err(GeometryError::NonPositiveRadius);
        }
        Ok(Ball { center, radius })
    }

    pub fn contains(&self, p: Point, eps: f64) -> bool {
        p.dist(self.center) <= self.radius * (1.0 + eps)
    }
}

/// Points within `reach` of `core`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stadium {
    pub core: Segment,
    pub reach: f64,
}

impl Stadium {
    pub fn contains(&self, p: Point) -> bool {
        dist_point_segment(p, &self.core) <= self.reach
    }
}

/// `[min.x, min.x + side] × [min.y, min.y + side]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSquare {
    pub min: Point,
    pub side: f64,
}

impl AxisSquare {
    pub fn new(min: Point, side: f64) -> Result<Self, GeometryError> {
        if !min.is_finite() || !side.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(side > 0.0) {
            return Err(GeometryError::NonPositiveSide);
        }
        Ok(AxisSquare { min, side })
    }

    pub fn centered(center: Point, side: f64) -> Self {
        AxisSquare {
            min: Point::new(center.x - 0.5 * side, center.y - 0.5 * side),
            side,
        }
    }

    pub fn max(&self) -> Point {
        Point::new(self.min.x + self.side, self.min.y + self.side)
    }

    pub fn center(&self) -> Point {
        Point::new(self.min.x + 0.5 * self.side, self.min.y + 0.5 * self.side)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.to_rect().contains(p)
    }

    pub fn to_rect(&self) -> AxisRect {
        AxisRect {
            min: self.min,
            max: self.max(),
        }
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRect {
    pub min: Point,
    pub max: Point,
}

impl AxisRect {
    pub fn new(min: Point, max: Point) -> Self {
        AxisRect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn intersection(&self, o: &AxisRect) -> Option<AxisRect> {
        let r = AxisRect {
            min: Point::new(self.min.x.max(o.min.x), self.min.y.max(o.min.y)),
            max: Point::new(self.max.x.min(o.max.x), self.max.y.min(o.max.y)),
        };
        (r.min.x <= r.max.x && r.min.y <= r.max.y).then_some(r)
    }

    pub fn expanded(&self, by: f64) -> AxisRect {
        AxisRect {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }

    pub fn union(&self, o: &AxisRect) -> AxisRect {
        AxisRect {
            min: Point::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }
}

pub fn dist_point_segment(p: Point, s: &Segment) -> f64 {
    libm::sqrt(dist2_point_segment(p, s.a, s.b))
}

/// Squared distance from `p` to the segment `a b`.
pub fn dist2_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let ap = p - a;
    let len2 = ab.norm2();
    let t = if len2 > 0.0 {
        (ap.dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let foot = a + ab * t;
    p.dist2(foot)
}

/// Whether a segment of length `len` is long enough to count for a ball of
/// radius `radius`, ties (within `eps`) included.
#[inline]
pub fn length_admits(len: f64, radius: f64, eps: f64) -> bool {
    len >= radius - eps * len.max(radius)
}

#[inline]
pub fn segment_intersects_ball(s: &Segment, ball: &Ball, eps: f64) -> bool {
    if !length_admits(s.length, ball.radius, eps) {
        return false;
    }
    let reach = ball.radius + eps * s.length.max(ball.radius);
    dist2_point_segment(ball.center, s.a, s.b) <= reach * reach
}

pub fn count_intersecting<'a, I>(segments: I, ball: &Ball, eps: f64) -> usize
where
    I: IntoIterator<Item = &'a Segment>,
{
    segments
        .into_iter()
        .filter(|s| segment_intersects_ball(s, ball, eps))
        .count()
}

/// The stadium `P_s`: points within `2|s|` of `s`.
pub fn build_stadium(s: &Segment) -> Stadium {
    Stadium {
        core: *s,
        reach: 2.0 * s.length,
    }
}

/// The `5|s| × 5|s|` axis-aligned square `Q_s` centred at the midpoint of `s`.
pub fn build_qs(s: &Segment) -> AxisSquare {
    AxisSquare::centered(s.midpoint(), 5.0 * s.length)
}

/// Closed segment/rectangle test; `tol` widens the rectangle on every side.
pub fn segment_intersects_rect(s: &Segment, r: &AxisRect, tol: f64) -> bool {
    let r = r.expanded(tol);
    let (a, b) = (s.a, s.b);
    // Liang-Barsky clip of the parameter range [0, 1].
    let d = b - a;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-d.x, a.x - r.min.x),
        (d.x, r.max.x - a.x),
        (-d.y, a.y - r.min.y),
        (d.y, r.max.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                if t > t1 {
                    return false;
                }
                if t > t0 {
                    t0 = t;
                }
            } else {
                if t < t0 {
                    return false;
                }
                if t < t1 {
                    t1 = t;
                }
            }
        }
    }
    t0 <= t1
}

/// Intersection point of two segments when they cross or touch at a single
/// point; `None` for disjoint or collinear-overlapping pairs.
pub fn segment_intersection(p: &Segment, q: &Segment) -> Option<Point> {
    let r = p.b - p.a;
    let s = q.b - q.a;
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let qp = q.a - p.a;
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some(p.a + r * t)
    } else {
        None
    }
}

/// Euclidean distance between two closed segments.
pub fn dist_segment_segment(p: &Segment, q: &Segment) -> f64 {
    if segment_intersection(p, q).is_some() {
        return 0.0;
    }
    let d = dist2_point_segment(p.a, q.a, q.b)
        .min(dist2_point_segment(p.b, q.a, q.b))
        .min(dist2_point_segment(q.a, p.a, p.b))
        .min(dist2_point_segment(q.b, p.a, p.b));
    libm::sqrt(d)
}
