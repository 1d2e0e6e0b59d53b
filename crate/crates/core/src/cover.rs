//! Ball covers behind the 25-, 4- and 3-approximation factors.
//!
//! Every generated ball has radius exactly `|s|` for its source segment `s`,
//! so any count it produces is an admissible lower bound on λ. The factor of a
//! cover is the number of its balls needed to cover `C ⊕ B₀` for one cell `C`
//! (with `B₀` the radius-`|s|` ball at the origin): any ball of radius `|s|`
//! centred in `C` is then split among that many cover balls.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::error::DensityError;
use crate::geometry::{build_qs, dist2_point_segment, AxisRect, Ball, Point, Segment};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Fine cells per `|s|`: triangles and cover-4 squares have side `|s|/9`.
pub const CELLS_PER_LENGTH: usize = 9;
/// The fine grids span `10|s| × 10|s|` around the midpoint of `s`.
pub const REGION_SPAN: usize = 10;
/// Cells along one side of a fine grid.
pub const GRID_CELLS: usize = CELLS_PER_LENGTH * REGION_SPAN;

/// Supported approximation factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApproxFactor {
    Three,
    Four,
    TwentyFive,
}

impl ApproxFactor {
    pub const fn value(self) -> u32 {
        match self {
            ApproxFactor::Three => 3,
            ApproxFactor::Four => 4,
            ApproxFactor::TwentyFive => 25,
        }
    }
}

impl TryFrom<u32> for ApproxFactor {
    type Error = DensityError;

    fn try_from(v: u32) -> Result<Self, Self::Error> {
        match v {
            3 => Ok(ApproxFactor::Three),
            4 => Ok(ApproxFactor::Four),
            25 => Ok(ApproxFactor::TwentyFive),
            other => Err(DensityError::UnsupportedFactor(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Apex above the base.
    Up,
    /// Apex below the base.
    Down,
}

/// An equilateral triangle of the sheared grid, identified by its centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleCell {
    pub center: Point,
    pub side: f64,
    pub orientation: Orientation,
    /// Rotation of the grid relative to the axes, in radians.
    pub base_angle: f64,
}

impl TriangleCell {
    pub fn circumradius(&self) -> f64 {
        self.side / SQRT_3
    }

    pub fn vertices(&self) -> [Point; 3] {
        let t = self.side;
        let base = -t / (2.0 * SQRT_3);
        let apex = t / SQRT_3;
        let raw = [
            Point::new(-0.5 * t, base),
            Point::new(0.5 * t, base),
            Point::new(0.0, apex),
        ];
        raw.map(|v| {
            let v = match self.orientation {
                Orientation::Up => v,
                Orientation::Down => v * -1.0,
            };
            self.center + v.rotated(self.base_angle)
        })
    }

    /// Closed containment, `tol` in absolute units.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let v = self.vertices();
        let mut sign = 0.0f64;
        for k in 0..3 {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            let e = b - a;
            let c = e.cross(p - a) / e.norm();
            if c < -tol {
                if sign > 0.0 {
                    return false;
                }
                sign = -1.0;
            } else if c > tol {
                if sign < 0.0 {
                    return false;
                }
                sign = 1.0;
            }
        }
        true
    }
}

/// A set of radius-`|s|` balls produced from one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCover {
    pub balls: Vec<Ball>,
    pub factor: u32,
    pub source_segment_id: u32,
}

/// 25 balls centred on the cells of the 5×5 partition of `Q_s`.
pub fn cover25(s: &Segment) -> BallCover {
    let r = s.length();
    let q = build_qs(s);
    let mut balls = Vec::with_capacity(25);
    for j in 0..5 {
        for i in 0..5 {
            let c = Point::new(
                q.min.x + (i as f64 + 0.5) * r,
                q.min.y + (j as f64 + 0.5) * r,
            );
            balls.push(Ball {
                center: c,
                radius: r,
            });
        }
    }
    BallCover {
        balls,
        factor: 25,
        source_segment_id: s.id(),
    }
}

struct TriangleLattice {
    corner: Point,
    side: f64,
    row_height: f64,
}

impl TriangleLattice {
    fn for_segment(s: &Segment) -> Self {
        let r = s.length();
        let m = s.midpoint();
        let half = 0.5 * REGION_SPAN as f64 * r;
        // The parallelogram spanned by e1 = (1, 0) and e2 = (1/2, √3/2), both of
        // length 10|s|, centred on the midpoint.
        let corner = Point::new(m.x - half - 0.5 * half, m.y - half * SQRT_3 * 0.5);
        let side = r / CELLS_PER_LENGTH as f64;
        TriangleLattice {
            corner,
            side,
            row_height: side * SQRT_3 * 0.5,
        }
    }

    /// Bottom-left vertex of rhombus `(i, j)`.
    fn origin(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.corner.x + i as f64 * self.side + j as f64 * 0.5 * self.side,
            self.corner.y + j as f64 * self.row_height,
        )
    }

    fn cell(&self, i: usize, j: usize, orientation: Orientation) -> TriangleCell {
        let o = self.origin(i, j);
        let k = match orientation {
            Orientation::Up => 1.0,
            Orientation::Down => 2.0,
        };
        TriangleCell {
            center: Point::new(o.x + k * 0.5 * self.side, o.y + k * self.row_height / 3.0),
            side: self.side,
            orientation,
            base_angle: 0.0,
        }
    }
}

/// The sheared triangular grid for `s`: `2 · 90 · 90` equilateral triangles of
/// side `|s|/9` tiling a `10|s| × 10|s|` parallelogram (60° shear) centred at
/// the midpoint of `s`. Row-major, up-triangle before down-triangle.
pub fn triangular_grid(s: &Segment) -> Vec<TriangleCell> {
    let lattice = TriangleLattice::for_segment(s);
    let mut cells = Vec::with_capacity(2 * GRID_CELLS * GRID_CELLS);
    for j in 0..GRID_CELLS {
        for i in 0..GRID_CELLS {
            cells.push(lattice.cell(i, j, Orientation::Up));
            cells.push(lattice.cell(i, j, Orientation::Down));
        }
    }
    cells
}

/// Centre offsets, in units of `r`, for an up-triangle with horizontal base.
fn triangle_ball_offsets() -> [Point; 3] {
    let ox = SQRT_3 / 4.0 + 1.0 / 36.0;
    let oy = 0.25 + 1.0 / (36.0 * SQRT_3);
    let oz = 0.5 + 1.0 / (18.0 * SQRT_3);
    // Balls over the upper-left, bottom and upper-right thirds of T ⊕ B₀.
    [
        Point::new(-ox, oy),
        Point::new(0.0, -oz),
        Point::new(ox, oy),
    ]
}

/// Three radius-`r` balls whose union covers `T ⊕ B₀`.
///
/// Down-triangles use the offsets reflected through the centre; rotated grids
/// rotate them by `base_angle`.
pub fn balls_for_triangle(t: &TriangleCell, r: f64) -> [Ball; 3] {
    triangle_ball_offsets().map(|o| {
        let o = match t.orientation {
            Orientation::Up => o,
            Orientation::Down => o * -1.0,
        };
        Ball {
            center: t.center + (o * r).rotated(t.base_angle),
            radius: r,
        }
    })
}

/// All `3 · 16200` balls of the triangle cover.
pub fn cover3(s: &Segment) -> BallCover {
    let r = s.length();
    let cells = triangular_grid(s);
    let mut balls = Vec::with_capacity(3 * cells.len());
    for t in &cells {
        balls.extend_from_slice(&balls_for_triangle(t, r));
    }
    BallCover {
        balls,
        factor: 3,
        source_segment_id: s.id(),
    }
}

struct SquareLattice {
    origin: Point,
    side: f64,
}

impl SquareLattice {
    fn for_segment(s: &Segment) -> Self {
        let r = s.length();
        let m = s.midpoint();
        let half = 0.5 * REGION_SPAN as f64 * r;
        SquareLattice {
            origin: Point::new(m.x - half, m.y - half),
            side: r / CELLS_PER_LENGTH as f64,
        }
    }

    /// Centre of cell `(i, j)`; indices may run one past either end.
    fn center(&self, i: isize, j: isize) -> Point {
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.side,
            self.origin.y + (j as f64 + 0.5) * self.side,
        )
    }
}

/// The four cover-4 balls of the cell centred at `center` with side `side`:
/// the cell corners pushed outward by the half-diagonal, i.e. the centres of
/// the four diagonal neighbour cells.
pub fn balls_for_square_cell(center: Point, side: f64, r: f64) -> [Ball; 4] {
    [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)].map(|(dx, dy)| Ball {
        center: Point::new(center.x + dx * side, center.y + dy * side),
        radius: r,
    })
}

/// The cover-4 ball set for `s`: square cells of side `|s|/9` over the
/// `10|s| × 10|s|` square around the midpoint; each cell contributes the four
/// balls of [`balls_for_square_cell`]. Neighbouring cells share ball centres,
/// so the cover is the deduplicated lattice of `92 × 92` centres.
pub fn cover4(s: &Segment) -> BallCover {
    let lattice = SquareLattice::for_segment(s);
    let r = s.length();
    let n = GRID_CELLS as isize;
    let mut balls = Vec::with_capacity((GRID_CELLS + 2) * (GRID_CELLS + 2));
    for j in -1..=n {
        for i in -1..=n {
            balls.push(Ball {
                center: lattice.center(i, j),
                radius: r,
            });
        }
    }
    BallCover {
        balls,
        factor: 4,
        source_segment_id: s.id(),
    }
}

/// Square cells of the cover-4 grid as `(centre, side)`.
pub fn square_grid(s: &Segment) -> Vec<(Point, f64)> {
    let lattice = SquareLattice::for_segment(s);
    let n = GRID_CELLS as isize;
    let mut cells = Vec::with_capacity(GRID_CELLS * GRID_CELLS);
    for j in 0..n {
        for i in 0..n {
            cells.push((lattice.center(i, j), lattice.side));
        }
    }
    cells
}

/// Whether `p` is within `reach` of `s`.
#[inline]
fn near_segment(p: Point, s: &Segment, reach: f64) -> bool {
    dist2_point_segment(p, s.a(), s.b()) <= reach * reach
}

/// Inclusive index range `[lo, hi]` of integers `k` with `base + k·step` in `[min, max]`,
/// clamped to `[0, n)`.
fn index_range(base: f64, step: f64, min: f64, max: f64, n: usize) -> Option<(usize, usize)> {
    let lo = libm::ceil((min - base) / step).max(0.0);
    let hi = libm::floor((max - base) / step).min(n as f64 - 1.0);
    (lo <= hi).then_some((lo as usize, hi as usize))
}

/// The balls of the `factor` cover that can matter for an optimal ball of
/// radius `|s|` touching `s`: those belonging to cells whose centre lies within
/// `|s|` plus the cell circumradius of `s`. Enumeration order is the order of
/// the full cover restricted to these cells.
pub fn relevant_balls(s: &Segment, factor: ApproxFactor) -> Vec<Ball> {
    match factor {
        ApproxFactor::TwentyFive => cover25(s).balls,
        ApproxFactor::Three => relevant_triangle_balls(s),
        ApproxFactor::Four => relevant_square_balls(s),
    }
}

fn reach_box(s: &Segment, reach: f64) -> AxisRect {
    s.bounding_rect().expanded(reach)
}

fn relevant_triangle_balls(s: &Segment) -> Vec<Ball> {
    let r = s.length();
    let lattice = TriangleLattice::for_segment(s);
    let t = lattice.side;
    let reach = (r + t / SQRT_3) * (1.0 + 1e-9);
    let bbox = reach_box(s, reach);
    let mut balls = Vec::new();
    // Row j holds centroids at heights h/3 and 2h/3 above its base.
    let Some((j0, j1)) = index_range(
        lattice.corner.y,
        lattice.row_height,
        bbox.min.y - lattice.row_height,
        bbox.max.y,
        GRID_CELLS,
    ) else {
        return balls;
    };
    for j in j0..=j1 {
        let row_x = lattice.corner.x + j as f64 * 0.5 * t;
        // Centroid x lies in [origin.x + t/2, origin.x + t].
        let Some((i0, i1)) =
            index_range(row_x, t, bbox.min.x - t, bbox.max.x - 0.5 * t, GRID_CELLS)
        else {
            continue;
        };
        for i in i0..=i1 {
            for orientation in [Orientation::Up, Orientation::Down] {
                let cell = lattice.cell(i, j, orientation);
                if near_segment(cell.center, s, reach) {
                    balls.extend_from_slice(&balls_for_triangle(&cell, r));
                }
            }
        }
    }
    balls
}

fn relevant_square_balls(s: &Segment) -> Vec<Ball> {
    let r = s.length();
    let lattice = SquareLattice::for_segment(s);
    let c = lattice.side;
    let reach = (r + c * FRAC_1_SQRT_2) * (1.0 + 1e-9);
    let bbox = reach_box(s, reach);
    let first = lattice.origin.x + 0.5 * c;
    let first_y = lattice.origin.y + 0.5 * c;
    let width = GRID_CELLS + 2;
    let mut marked = alloc::vec![false; width * width];
    if let (Some((i0, i1)), Some((j0, j1))) = (
        index_range(first, c, bbox.min.x, bbox.max.x, GRID_CELLS),
        index_range(first_y, c, bbox.min.y, bbox.max.y, GRID_CELLS),
    ) {
        for j in j0..=j1 {
            for i in i0..=i1 {
                if near_segment(lattice.center(i as isize, j as isize), s, reach) {
                    // Lattice index k maps to slot k + 1.
                    for (di, dj) in [(0, 0), (2, 0), (0, 2), (2, 2)] {
                        marked[(j + dj) * width + i + di] = true;
                    }
                }
            }
        }
    }
    let mut balls = Vec::new();
    for (slot, _) in marked.iter().enumerate().filter(|(_, m)| **m) {
        let (i, j) = ((slot % width) as isize - 1, (slot / width) as isize - 1);
        balls.push(Ball {
            center: lattice.center(i, j),
            radius: r,
        });
    }
    balls
}
