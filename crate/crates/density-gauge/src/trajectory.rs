//! Trajectory datasets: ingest, per-curve density, summary statistics and
//! histograms.
//!
//! Curves are processed independently. The size `n` of a curve is its
//! number of edges (segments).

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use density_gauge_core::{DensityEstimate, GeometryError, Point, Segment};
use rayon::prelude::*;
use serde::Serialize;

use crate::algo::{Algo, Rounds};
use crate::error::AppError;

/// Mean Earth radius in metres, for the equirectangular projection.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryFormat {
    /// `id,x,y`, vertices in file order.
    CsvXy,
    /// `id,t,x,y`, vertices ordered by `t`.
    CsvTxy,
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    pub format: TrajectoryFormat,
    /// Skip the first line.
    pub header: bool,
    /// Treat `x, y` as longitude and latitude in degrees and project them to
    /// metres around the mean latitude. Approximate away from that latitude.
    pub equirectangular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    pub vertices: Vec<Point>,
    pub source: String,
}

impl Trajectory {
    /// Edges as segments with ids `0..n`.
    pub fn segments(&self) -> Result<Vec<Segment>, GeometryError> {
        self.vertices
            .windows(2)
            .enumerate()
            .map(|(i, w)| Segment::new(i as u32, w[0], w[1]))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub curves: Vec<Trajectory>,
    /// Ids of curves with fewer than two distinct vertices.
    pub skipped: Vec<String>,
}

pub fn ingest(path: &Path, opts: IngestOptions) -> Result<Ingested, AppError> {
    let file = File::open(path).map_err(|source| AppError::Read {
        path: path.to_owned(),
        source,
    })?;
    ingest_reader(file, path, opts)
}

/// Groups rows by id (in order of first appearance), orders vertices, drops
/// consecutive duplicates and skips curves left with fewer than two.
pub fn ingest_reader(
    reader: impl Read,
    path: &Path,
    opts: IngestOptions,
) -> Result<Ingested, AppError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let fields = match opts.format {
        TrajectoryFormat::CsvXy => 3,
        TrajectoryFormat::CsvTxy => 4,
    };
    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(f64, Point)>> = HashMap::new();
    for (k, record) in rdr.records().enumerate() {
        let fallback = k as u64 + 1 + opts.header as u64;
        let record = record.map_err(|e| {
            AppError::parse(
                path,
                e.position().map_or(fallback, |p| p.line()),
                e.to_string(),
            )
        })?;
        let line = record.position().map_or(fallback, |p| p.line());
        if record.len() != fields {
            return Err(AppError::parse(
                path,
                line,
                format!("expected {fields} fields, found {}", record.len()),
            ));
        }
        let num = |i: usize| {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    AppError::parse(
                        path,
                        line,
                        format!("field {} is not a number: {:?}", i + 1, &record[i]),
                    )
                })
        };
        let (t, x, y) = match opts.format {
            TrajectoryFormat::CsvXy => (0.0, num(1)?, num(2)?),
            TrajectoryFormat::CsvTxy => (num(1)?, num(2)?, num(3)?),
        };
        let id = record[0].to_owned();
        rows.entry(id.clone())
            .or_insert_with(|| {
                order.push(id);
                Vec::new()
            })
            .push((t, Point::new(x, y)));
    }

    let lat0 = if opts.equirectangular {
        let all = rows.values().flatten();
        let (sum, count) = all.fold((0.0, 0usize), |(s, c), (_, p)| (s + p.y, c + 1));
        if count > 0 {
            sum / count as f64
        } else {
            0.0
        }
    } else {
        0.0
    };
    let source = path.display().to_string();
    let mut out = Ingested::default();
    for id in order {
        let mut pts = rows.remove(&id).expect("grouped above");
        if opts.format == TrajectoryFormat::CsvTxy {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        let mut vertices: Vec<Point> = Vec::with_capacity(pts.len());
        for (_, p) in pts {
            let p = if opts.equirectangular {
                project(p, lat0)
            } else {
                p
            };
            if vertices.last() != Some(&p) {
                vertices.push(p);
            }
        }
        if vertices.len() < 2 {
            log::warn!("{source}: curve {id:?} has fewer than two distinct vertices, skipped");
            out.skipped.push(id);
        } else {
            out.curves.push(Trajectory {
                id,
                vertices,
                source: source.clone(),
            });
        }
    }
    Ok(out)
}

/// Longitude/latitude in degrees to metres, true to scale at `lat0`.
pub fn project(p: Point, lat0: f64) -> Point {
    let k = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
    Point::new(k * p.x * lat0.to_radians().cos(), k * p.y)
}

/// Density estimate of one curve's edges.
pub fn curve_density(
    t: &Trajectory,
    algo: Algo,
    eps: f64,
    grid_resolution: usize,
) -> Result<DensityEstimate, AppError> {
    algo.run(&t.segments()?, eps, grid_resolution, Rounds::Serial)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub id: String,
    pub n: usize,
    pub lambda_hat: u32,
}

/// Summary of a dataset, one row of the six-column table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub dataset_name: String,
    pub curve_count: usize,
    pub max_curve_size: usize,
    pub max_lambda: u32,
    pub median_lambda: f64,
    pub median_lambda_over_n: f64,
    /// Sorted by curve id.
    pub per_curve: Vec<CurveRow>,
}

/// Column names of [`DatasetStats::table_row`].
pub const TABLE_COLUMNS: [&str; 6] = [
    "dataset",
    "curves",
    "max_curve_size",
    "max",
    "median",
    "median_lambda_over_n",
];

impl DatasetStats {
    pub fn from_rows(dataset_name: &str, mut per_curve: Vec<CurveRow>) -> Self {
        per_curve.sort_by(|a, b| a.id.cmp(&b.id));
        let lambdas: Vec<f64> = per_curve.iter().map(|r| r.lambda_hat as f64).collect();
        let ratios: Vec<f64> = per_curve
            .iter()
            .map(|r| r.lambda_hat as f64 / r.n as f64)
            .collect();
        DatasetStats {
            dataset_name: dataset_name.to_owned(),
            curve_count: per_curve.len(),
            max_curve_size: per_curve.iter().map(|r| r.n).max().unwrap_or(0),
            max_lambda: per_curve.iter().map(|r| r.lambda_hat).max().unwrap_or(0),
            median_lambda: median(lambdas),
            median_lambda_over_n: median(ratios),
            per_curve,
        }
    }

    /// The six table fields; median to one decimal and λ/n to three.
    pub fn table_row(&self) -> [String; 6] {
        [
            self.dataset_name.clone(),
            self.curve_count.to_string(),
            self.max_curve_size.to_string(),
            self.max_lambda.to_string(),
            format!("{:.1}", self.median_lambda),
            format!("{:.3}", self.median_lambda_over_n),
        ]
    }
}

/// Median; the mean of the two middle values for an even count, NaN when
/// empty.
pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Per-curve estimates (in parallel on the current rayon pool) and their
/// summary.
pub fn dataset_stats(
    dataset_name: &str,
    curves: &[Trajectory],
    algo: Algo,
    eps: f64,
    grid_resolution: usize,
) -> Result<DatasetStats, AppError> {
    let rows = curves
        .par_iter()
        .map(|t| {
            let e = curve_density(t, algo, eps, grid_resolution)?;
            Ok(CurveRow {
                id: t.id.clone(),
                n: t.edge_count(),
                lambda_hat: e.value,
            })
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    Ok(DatasetStats::from_rows(dataset_name, rows))
}

/// Equal-width bins over `[min λ, max λ]`, left-closed and right-open except
/// the last, which is closed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", self.edges[i], self.edges[i + 1], c));
        }
        s
    }
}

pub fn histogram(stats: &DatasetStats, bins: usize) -> Result<Histogram, AppError> {
    if bins == 0 {
        return Err(AppError::Usage("histogram needs at least one bin".into()));
    }
    let values: Vec<f64> = stats
        .per_curve
        .iter()
        .map(|r| r.lambda_hat as f64)
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if values.is_empty() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    };
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0 / bins as f64
    };
    let edges: Vec<f64> = (0..=bins)
        .map(|i| {
            if i == bins && hi > lo {
                hi
            } else {
                lo + width * i as f64
            }
        })
        .collect();
    let mut counts = vec![0u64; bins];
    for v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram { edges, counts })
}
