//! Approximating the λ-low-density value of a set of planar line segments.
//!
//! A segment set is λ-low-density when every ball `B` meets at most λ
//! segments whose length is at least `radius(B)`. This crate computes
//! guaranteed approximations of the smallest such λ:
//!
//! - [`naive::approx_density`]: quadratic-time 25-, 4- and 3-approximations
//!   built on the ball covers in [`cover`].
//! - [`quadtree::DensityIndex`]: a compressed quadtree over dyadic squares that
//!   yields the 3-approximation in near-linear time and keeps it up to date
//!   under insertions.
//! - [`naive::oracle_density`]: an exact brute-force reference for small sets.
//!
//! The crate is `no_std` and only needs `alloc`.
//!
//! ```
//! use density_gauge_core::geometry::{Point, Segment};
//! use density_gauge_core::quadtree::DensityIndex;
//!
//! let star: Vec<Segment> = (0..6)
//!     .map(|i| {
//!         let t = i as f64 * core::f64::consts::PI / 6.0;
//!         let (s, c) = (libm::sin(t) * 0.5, libm::cos(t) * 0.5);
//!         Segment::new(i, Point::new(-c, -s), Point::new(c, s)).unwrap()
//!     })
//!     .collect();
//! let index = DensityIndex::build(&star).unwrap();
//! let estimate = index.estimate();
//! assert!(estimate.value >= 2 && estimate.value <= 6);
//! ```

#![no_std]
// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod canonical;
pub mod cover;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod naive;
pub mod quadtree;

pub use error::{CanonicalError, DensityError, GeometryError, QuadtreeError};
pub use estimate::DensityEstimate;
pub use geometry::{Ball, Point, Segment, DEFAULT_EPS};
