//! The estimators selectable from the command line.

use density_gauge_core::cover::ApproxFactor;
use density_gauge_core::naive::{self, oracle_density};
use density_gauge_core::quadtree::DensityIndex;
use density_gauge_core::{DensityEstimate, Segment};

use crate::error::AppError;
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    /// Exact brute force, at most 500 segments.
    Oracle,
    /// Quadratic 25-approximation.
    Approx25,
    /// Quadratic 4-approximation.
    Approx4,
    /// Quadratic 3-approximation.
    Approx3,
    /// Quadtree 3-approximation.
    #[value(name = "approx3-fast")]
    Approx3Fast,
}

/// How the rounds of the quadratic estimators are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounds {
    Serial,
    Parallel,
}

impl Algo {
    pub fn factor(self) -> u32 {
        match self {
            Algo::Oracle => 1,
            Algo::Approx25 => 25,
            Algo::Approx4 => 4,
            Algo::Approx3 | Algo::Approx3Fast => 3,
        }
    }

    pub fn run(
        self,
        segments: &[Segment],
        eps: f64,
        grid_resolution: usize,
        rounds: Rounds,
    ) -> Result<DensityEstimate, AppError> {
        let quadratic = |f: ApproxFactor| match rounds {
            Rounds::Serial => naive::approx_density(segments, f, eps),
            Rounds::Parallel => parallel::approx_density(segments, f, eps),
        };
        Ok(match self {
            Algo::Oracle => oracle_density(segments, grid_resolution, eps)?,
            Algo::Approx25 => quadratic(ApproxFactor::TwentyFive),
            Algo::Approx4 => quadratic(ApproxFactor::Four),
            Algo::Approx3 => quadratic(ApproxFactor::Three),
            Algo::Approx3Fast => DensityIndex::build_with_eps(segments, eps)?.estimate(),
        })
    }
}
