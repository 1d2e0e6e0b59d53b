//! Files, trajectories, benchmarks and the command line around
//! [`density_gauge_core`].
//!
//! - [`io`]: segment CSV files (`x1,y1,x2,y2`).
//! - [`trajectory`]: polyline datasets, per-curve densities and summary
//!   statistics.
//! - [`families`]: seeded synthetic inputs with known density.
//! - [`parallel`]: thread-count policy and round-parallel estimators.
//! - [`bench`]: scaling measurements.
//! - [`report`]: the JSON run report.
//! - [`cli`]: argument parsing and command dispatch.

pub mod algo;
pub mod bench;
pub mod cli;
pub mod error;
pub mod families;
pub mod io;
pub mod parallel;
pub mod report;
pub mod trajectory;

pub use density_gauge_core as core;
pub use error::AppError;
