//! Dyadic squares of the unit square, bit tricks on binary fractions, and
//! canonical covers of axis rectangles.
//!
//! Every `f64` in `[0, 1)` is a finite binary fraction, so "the first
//! differing bit" of two such values is exact and falls out of their IEEE-754
//! exponent and mantissa fields.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::CanonicalError;
use crate::geometry::{AxisRect, Ball, Point, Segment};

/// Deepest dyadic level handled. `kx`, `ky` then fit in 53 bits and every
/// cell corner is an exact `f64`.
pub const MAX_LEVEL: u32 = 53;

/// Upper bound on [`canonical_cover`] output for a `Q_s` region, whose side is
/// five times `max_side`.
pub const MAX_COVER_SQUARES: usize = 1024;

const EXP_MASK: u64 = 0x7ff;
const MANT_MASK: u64 = (1 << 52) - 1;
const SCALE_53: f64 = 9_007_199_254_740_992.0; // 2^53

fn check_unit(x: f64) -> Result<(), CanonicalError> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(CanonicalError::OutOfUnitRange(x))
    }
}

/// Fractional position of the leading one bit of `x` in `(0, 1)`.
fn leading_position(x: f64) -> u32 {
    let bits = x.to_bits();
    let exp = (bits >> 52) & EXP_MASK;
    if exp == 0 {
        let mant = bits & MANT_MASK;
        1074 - (63 - mant.leading_zeros())
    } else {
        (1023 - exp) as u32
    }
}

/// 1-based index of the first fractional binary digit where `alpha` and
/// `beta` differ.
///
/// ```
/// use density_gauge_core::canonical::bit_delta;
/// assert_eq!(bit_delta(0.625, 0.5).unwrap(), 3);
/// assert_eq!(bit_delta(0.5, 0.25).unwrap(), 1);
/// ```
pub fn bit_delta(alpha: f64, beta: f64) -> Result<u32, CanonicalError> {
    check_unit(alpha)?;
    check_unit(beta)?;
    if alpha == beta {
        return Err(CanonicalError::EqualValues);
    }
    let (a, b) = (alpha.to_bits(), beta.to_bits());
    let (ea, eb) = ((a >> 52) & EXP_MASK, (b >> 52) & EXP_MASK);
    if ea != eb {
        return Ok(leading_position(alpha.max(beta)));
    }
    let h = 63 - ((a ^ b) & MANT_MASK).leading_zeros();
    Ok(if ea == 0 {
        1074 - h
    } else {
        (1023 - ea) as u32 + 52 - h
    })
}

/// Smallest `i` with `x · 2^i` an integer (0 for `x == 0`).
pub fn dyadic_level(x: f64) -> u32 {
    if x == 0.0 {
        return 0;
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & EXP_MASK) as i64;
    let (sig, e) = if exp == 0 {
        (bits & MANT_MASK, -1074)
    } else {
        ((bits & MANT_MASK) | (1 << 52), exp - 1075)
    };
    let level = -(e + sig.trailing_zeros() as i64);
    level.max(0) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Axis {
    /// A line `x = k/2^i`.
    Vertical,
    /// A line `y = k/2^i`.
    Horizontal,
}

/// The dyadic line `value = k / 2^significance`, `k` odd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separator {
    pub axis: Axis,
    pub value: f64,
    pub significance: u32,
    pub k: u64,
}

/// The dyadic `k/2^i` (`k` odd) of smallest `i` in the closed range `[lo, hi]`.
///
/// ```
/// use density_gauge_core::canonical::{most_significant_separator, Axis};
/// let s = most_significant_separator(0.3, 0.6, Axis::Vertical).unwrap();
/// assert_eq!((s.value, s.significance, s.k), (0.5, 1, 1));
/// ```
pub fn most_significant_separator(
    lo: f64,
    hi: f64,
    axis: Axis,
) -> Result<Separator, CanonicalError> {
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(CanonicalError::InvalidRegion);
    }
    let value = if hi == 1.0 {
        if lo <= 0.5 {
            0.5
        } else {
            // 1 - lo is exact for lo in (1/2, 1).
            let i = leading_position(1.0 - lo);
            if i > MAX_LEVEL {
                return Err(CanonicalError::LevelCapExceeded { level: i });
            }
            1.0 - libm::ldexp(1.0, -(i as i32))
        }
    } else {
        let i = bit_delta(lo, hi)?;
        if lo > 0.0 && dyadic_level(lo) < i {
            lo
        } else {
            if i > MAX_LEVEL {
                return Err(CanonicalError::LevelCapExceeded { level: i });
            }
            // Keep the shared prefix of hi and set bit i.
            let scale = libm::ldexp(1.0, i as i32);
            libm::floor(hi * scale) / scale
        }
    };
    let significance = dyadic_level(value);
    if significance > MAX_LEVEL {
        return Err(CanonicalError::LevelCapExceeded {
            level: significance,
        });
    }
    let k = libm::ldexp(value, significance as i32) as u64;
    Ok(Separator {
        axis,
        value,
        significance,
        k,
    })
}

/// `[kx/2^i, (kx+1)/2^i) × [ky/2^i, (ky+1)/2^i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CanonicalSquare {
    pub level: u32,
    pub kx: u64,
    pub ky: u64,
}

impl CanonicalSquare {
    pub const UNIT: CanonicalSquare = CanonicalSquare {
        level: 0,
        kx: 0,
        ky: 0,
    };

    pub fn new(level: u32, kx: u64, ky: u64) -> Result<Self, CanonicalError> {
        if level > MAX_LEVEL || kx >> level != 0 || ky >> level != 0 {
            return Err(CanonicalError::InvalidSquare);
        }
        Ok(CanonicalSquare { level, kx, ky })
    }

    /// The level-`level` cell containing `p` (half-open cells).
    pub fn containing(p: Point, level: u32) -> Result<Self, CanonicalError> {
        check_unit(p.x)?;
        check_unit(p.y)?;
        if level > MAX_LEVEL {
            return Err(CanonicalError::LevelCapExceeded { level });
        }
        let scale = libm::ldexp(1.0, level as i32);
        Ok(CanonicalSquare {
            level,
            kx: libm::floor(p.x * scale) as u64,
            ky: libm::floor(p.y * scale) as u64,
        })
    }

    pub fn side(&self) -> f64 {
        // 2^-level, built from the exponent field; level <= 53 stays normal.
        f64::from_bits(((1023 - self.level) as u64) << 52)
    }

    pub fn min_corner(&self) -> Point {
        let s = self.side();
        Point::new(self.kx as f64 * s, self.ky as f64 * s)
    }

    pub fn max_corner(&self) -> Point {
        let s = self.side();
        Point::new((self.kx + 1) as f64 * s, (self.ky + 1) as f64 * s)
    }

    pub fn center(&self) -> Point {
        self.min_corner().midpoint(self.max_corner())
    }

    /// The closed square.
    pub fn to_rect(&self) -> AxisRect {
        AxisRect::new(self.min_corner(), self.max_corner())
    }

    /// Whether `other` equals or lies inside `self`.
    pub fn contains(&self, other: &CanonicalSquare) -> bool {
        other.level >= self.level
            && other.kx >> (other.level - self.level) == self.kx
            && other.ky >> (other.level - self.level) == self.ky
    }

    /// Ancestor at `level`; `self` when `level >= self.level`.
    pub fn ancestor(&self, level: u32) -> CanonicalSquare {
        if level >= self.level {
            return *self;
        }
        let d = self.level - level;
        CanonicalSquare {
            level,
            kx: self.kx >> d,
            ky: self.ky >> d,
        }
    }

    pub fn parent(&self) -> Option<CanonicalSquare> {
        (self.level > 0).then(|| self.ancestor(self.level - 1))
    }

    /// Children in Z-order: bottom-left, bottom-right, top-left, top-right.
    pub fn children(&self) -> Option<[CanonicalSquare; 4]> {
        (self.level < MAX_LEVEL).then(|| {
            [0u64, 1, 2, 3].map(|q| CanonicalSquare {
                level: self.level + 1,
                kx: 2 * self.kx + (q & 1),
                ky: 2 * self.ky + (q >> 1),
            })
        })
    }

    /// Quadrant (`0..4`, Z-order) of the child of `self` containing `d`,
    /// a proper descendant.
    pub fn quadrant_of(&self, d: &CanonicalSquare) -> usize {
        debug_assert!(d.level > self.level && self.contains(d));
        let c = d.ancestor(self.level + 1);
        ((c.kx & 1) | ((c.ky & 1) << 1)) as usize
    }

    /// Sort key whose numeric order is the Z-order: the Morton code of the
    /// bottom-left corner at level 53, then the level.
    pub fn zorder_key(&self) -> u128 {
        let shift = MAX_LEVEL - self.level;
        let morton = spread(self.kx << shift) | (spread(self.ky << shift) << 1);
        (morton << 8) | self.level as u128
    }
}

/// Interleaves zeros between the low 64 bits of `v`.
fn spread(v: u64) -> u128 {
    let mut x = v as u128;
    x = (x | (x << 32)) & 0x0000_0000_ffff_ffff_0000_0000_ffff_ffff;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff_0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff_00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f_0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333_3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555_5555_5555_5555_5555;
    x
}

fn bit_len(v: u64) -> u32 {
    64 - v.leading_zeros()
}

/// Smallest canonical square containing both `a` and `b`.
pub fn lca(a: &CanonicalSquare, b: &CanonicalSquare) -> CanonicalSquare {
    let m = a.level.max(b.level);
    let (ax, ay) = (a.kx << (m - a.level), a.ky << (m - a.level));
    let (bx, by) = (b.kx << (m - b.level), b.ky << (m - b.level));
    let level = a
        .level
        .min(b.level)
        .min(m - bit_len(ax ^ bx))
        .min(m - bit_len(ay ^ by));
    CanonicalSquare {
        level,
        kx: ax >> (m - level),
        ky: ay >> (m - level),
    }
}

/// Depth-first order visiting a square before its children, children
/// bottom-left, bottom-right, top-left, top-right.
pub fn zorder_compare(a: &CanonicalSquare, b: &CanonicalSquare) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    if a.contains(b) {
        return Ordering::Less;
    }
    if b.contains(a) {
        return Ordering::Greater;
    }
    let l = lca(a, b);
    l.quadrant_of(a).cmp(&l.quadrant_of(b))
}

impl Ord for CanonicalSquare {
    fn cmp(&self, other: &Self) -> Ordering {
        zorder_compare(self, other)
    }
}

impl PartialOrd for CanonicalSquare {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Uniform power-of-two scale plus translation, centring the data inside
/// `[0.05, 0.95]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UnitTransform {
    pub scale: f64,
    pub offset: Point,
}

impl UnitTransform {
    pub const MARGIN: f64 = 0.05;

    pub const IDENTITY: UnitTransform = UnitTransform {
        scale: 1.0,
        offset: Point::new(0.0, 0.0),
    };

    /// Maps `bounds` into the margin box, centred.
    pub fn fit(bounds: &AxisRect) -> Result<Self, CanonicalError> {
        if !bounds.min.is_finite() || !bounds.max.is_finite() {
            return Err(CanonicalError::InvalidRegion);
        }
        let extent = bounds.width().max(bounds.height());
        if !(extent > 0.0) {
            return Err(CanonicalError::DegenerateExtent);
        }
        // A power of two: scaling never rounds, only the translation does.
        let (_, e) = libm::frexp((1.0 - 2.0 * Self::MARGIN) / extent);
        let scale = libm::ldexp(1.0, e - 1);
        let c = bounds.min.midpoint(bounds.max);
        let offset = Point::new(0.5 - c.x * scale, 0.5 - c.y * scale);
        Ok(UnitTransform { scale, offset })
    }

    pub fn apply(&self, p: Point) -> Point {
        p * self.scale + self.offset
    }

    pub fn invert(&self, p: Point) -> Point {
        (p - self.offset) * (1.0 / self.scale)
    }

    pub fn apply_ball(&self, b: &Ball) -> Ball {
        Ball {
            center: self.apply(b.center),
            radius: b.radius * self.scale,
        }
    }

    pub fn invert_ball(&self, b: &Ball) -> Ball {
        Ball {
            center: self.invert(b.center),
            radius: b.radius / self.scale,
        }
    }

    pub fn apply_segment(&self, s: &Segment) -> Result<Segment, CanonicalError> {
        s.map_points(|p| self.apply(p))
            .map_err(|_| CanonicalError::DegenerateExtent)
    }

    pub fn invert_rect(&self, r: &AxisRect) -> AxisRect {
        AxisRect::new(self.invert(r.min), self.invert(r.max))
    }
}

/// Bounding box of all endpoints.
pub fn bounds_of(segments: &[Segment]) -> Option<AxisRect> {
    segments
        .iter()
        .map(Segment::bounding_rect)
        .reduce(|a, b| a.union(&b))
}

/// Maps all segments into `[0.05, 0.95]²` with one uniform scale.
pub fn normalize(segments: &[Segment]) -> Result<(Vec<Segment>, UnitTransform), CanonicalError> {
    let bounds = bounds_of(segments).ok_or(CanonicalError::EmptyInput)?;
    let t = UnitTransform::fit(&bounds)?;
    let out = segments
        .iter()
        .map(|s| t.apply_segment(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((out, t))
}

/// Coarsest level whose cells have side at most `max_side`.
pub fn level_for_side(max_side: f64) -> Result<u32, CanonicalError> {
    if !(max_side > 0.0) || !max_side.is_finite() {
        return Err(CanonicalError::InvalidRegion);
    }
    let mut level = 0;
    let mut side = 1.0;
    while side > max_side {
        side *= 0.5;
        level += 1;
        if level > MAX_LEVEL {
            return Err(CanonicalError::LevelCapExceeded { level });
        }
    }
    Ok(level)
}

fn overlaps(a: &AxisRect, b: &AxisRect) -> bool {
    a.min.x.max(b.min.x) < a.max.x.min(b.max.x) && a.min.y.max(b.min.y) < a.max.y.min(b.max.y)
}

fn validate_region(rect: &AxisRect) -> Result<(), CanonicalError> {
    let ok = rect.min.is_finite()
        && rect.max.is_finite()
        && 0.0 <= rect.min.x
        && rect.min.x < rect.max.x
        && rect.max.x <= 1.0
        && 0.0 <= rect.min.y
        && rect.min.y < rect.max.y
        && rect.max.y <= 1.0;
    if ok {
        Ok(())
    } else {
        Err(CanonicalError::InvalidRegion)
    }
}

/// Level-53 cell indices of the lowest and highest cells meeting `[lo, hi]`
/// with positive length.
fn cell_span(lo: f64, hi: f64) -> (u64, u64) {
    (
        libm::floor(lo * SCALE_53) as u64,
        libm::ceil(hi * SCALE_53) as u64 - 1,
    )
}

/// Smallest canonical square containing the closed rectangle, up to its
/// measure-zero upper boundary.
fn container(rect: &AxisRect) -> CanonicalSquare {
    let (x0, x1) = cell_span(rect.min.x, rect.max.x);
    let (y0, y1) = cell_span(rect.min.y, rect.max.y);
    lca(
        &CanonicalSquare {
            level: MAX_LEVEL,
            kx: x0,
            ky: y0,
        },
        &CanonicalSquare {
            level: MAX_LEVEL,
            kx: x1,
            ky: y1,
        },
    )
}

/// Canonical squares of side at most `max_side` whose union covers `rect`.
///
/// `rect` is split along its most significant vertical and horizontal
/// separators into at most four parts. Each part is expanded to the smallest
/// canonical square containing it, then refined (keeping only cells that
/// overlap `rect`) down to the coarsest level with side `≤ max_side`. A
/// canonical `rect` small enough is returned as is. Output is in Z-order.
pub fn canonical_cover(
    rect: &AxisRect,
    max_side: f64,
) -> Result<Vec<CanonicalSquare>, CanonicalError> {
    validate_region(rect)?;
    let target = level_for_side(max_side)?;
    let whole = container(rect);
    if whole.level >= target && whole.to_rect() == *rect {
        return Ok(alloc::vec![whole]);
    }

    let cuts = |lo: f64, hi: f64, axis| -> ([f64; 3], usize) {
        match most_significant_separator(lo, hi, axis) {
            Ok(s) if s.value > lo && s.value < hi => ([lo, s.value, hi], 2),
            _ => ([lo, hi, hi], 1),
        }
    };
    let (xs, nx) = cuts(rect.min.x, rect.max.x, Axis::Vertical);
    let (ys, ny) = cuts(rect.min.y, rect.max.y, Axis::Horizontal);

    let mut out = Vec::new();
    let mut stack = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let part = AxisRect::new(Point::new(xs[i], ys[j]), Point::new(xs[i + 1], ys[j + 1]));
            let c = container(&part);
            if c.level >= target {
                out.push(c.ancestor(target));
                continue;
            }
            stack.push(c);
            while let Some(sq) = stack.pop() {
                if sq.level == target {
                    out.push(sq);
                    continue;
                }
                for child in sq.children().into_iter().flatten() {
                    if overlaps(&child.to_rect(), &part) {
                        stack.push(child);
                    }
                }
            }
        }
    }
    out.sort_unstable_by_key(CanonicalSquare::zorder_key);
    out.dedup();
    Ok(out)
}

/// Level-`level` cells overlapping `rect` with positive area, row by row.
/// `rect` must already be validated.
fn grid_cells(rect: &AxisRect, level: u32) -> impl Iterator<Item = CanonicalSquare> {
    let ((x0, x1), (y0, y1)) = grid_span(rect, level);
    (y0..y1).flat_map(move |ky| (x0..x1).map(move |kx| CanonicalSquare { level, kx, ky }))
}

/// Half-open index ranges `(x, y)` of the level-`level` cells overlapping
/// `rect` with positive area.
pub(crate) fn grid_span(rect: &AxisRect, level: u32) -> ((u64, u64), (u64, u64)) {
    let scale = libm::ldexp(1.0, level as i32);
    let span = |lo: f64, hi: f64| {
        (
            libm::floor(lo * scale) as u64,
            libm::ceil(hi * scale) as u64,
        )
    };
    (span(rect.min.x, rect.max.x), span(rect.min.y, rect.max.y))
}

/// A rectangle that is itself a canonical square.
pub(crate) fn as_canonical(rect: &AxisRect) -> Option<CanonicalSquare> {
    let c = container(rect);
    (c.to_rect() == *rect).then_some(c)
}

/// All level-`level` cells overlapping `rect` with positive area, in Z-order.
/// Equal to [`canonical_cover`] at the coarsest admissible level, except for
/// the exact-square shortcut; enumerated directly.
pub fn grid_cover(rect: &AxisRect, level: u32) -> Result<Vec<CanonicalSquare>, CanonicalError> {
    validate_region(rect)?;
    if level > MAX_LEVEL {
        return Err(CanonicalError::LevelCapExceeded { level });
    }
    let mut out: Vec<_> = grid_cells(rect, level).collect();
    out.sort_unstable_by_key(CanonicalSquare::zorder_key);
    Ok(out)
}
