//! The JSON run report. Field order is fixed by the struct definitions, so
//! equal inputs and flags give byte-identical output once timing is omitted.

use std::io::Write;

use density_gauge_core::quadtree::IndexStats;
use density_gauge_core::DensityEstimate;
use serde::Serialize;

use crate::algo::Algo;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InputSummary {
    pub segments: usize,
    /// Trajectory inputs only.
    pub curves: Option<usize>,
    /// Trajectory inputs only: curves with fewer than two distinct vertices.
    pub skipped_curves: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub algo: Option<Algo>,
    /// The seed of the run's only random generator, when one was used.
    pub seed: Option<u64>,
    pub input_summary: InputSummary,
    pub estimate: Option<DensityEstimate>,
    /// `null` when timing is omitted.
    pub wall_time_ms: Option<f64>,
    /// Canonical squares of the quadtree, when one was built.
    pub peak_square_count: Option<usize>,
    pub index: Option<IndexStats>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_owned(),
            algo: None,
            seed: None,
            input_summary: InputSummary::default(),
            estimate: None,
            wall_time_ms: None,
            peak_square_count: None,
            index: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report is plain data")
    }

    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.to_json())
    }
}

/// Milliseconds since `start`, or `None` when timing is omitted.
pub fn elapsed_ms(start: std::time::Instant, omit: bool) -> Option<f64> {
    (!omit).then(|| start.elapsed().as_secs_f64() * 1e3)
}
