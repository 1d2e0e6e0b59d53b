//! Command-line interface.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use density_gauge_core::geometry::AxisRect;
use density_gauge_core::naive::MIN_GRID_RESOLUTION;
use density_gauge_core::quadtree::DensityIndex;
use density_gauge_core::{Point, QuadtreeError, Segment, DEFAULT_EPS};
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algo::{Algo, Rounds};
use crate::bench::{self, BenchConfig};
use crate::error::AppError;
use crate::families::Family;
use crate::io::read_segments;
use crate::parallel;
use crate::report::{elapsed_ms, InputSummary, RunReport};
use crate::trajectory::{self, IngestOptions, TrajectoryFormat, TABLE_COLUMNS};

#[derive(Debug, Parser)]
#[command(
    name = "density-gauge",
    version,
    about = "Approximate the low-density value of planar segment sets"
)]
pub struct Cli {
    /// Worker threads for per-segment and per-curve loops; the
    /// DENSITY_GAUGE_THREADS environment variable takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report timings as null so that repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub omit_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the density of one input.
    Estimate(EstimateArgs),
    /// Insert segments one at a time into the dynamic index.
    InsertSim(InsertSimArgs),
    /// Per-curve densities and dataset summary of a trajectory file.
    Stats(StatsArgs),
    /// Scaling table on a synthetic family.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// `x1,y1,x2,y2` per line.
    Segments,
    /// Polylines; all edges of all curves form one set.
    Trajectories,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    /// Column layout of trajectory files.
    #[arg(long, value_enum, default_value = "csv-xy")]
    pub traj_format: TrajectoryFormat,
    /// The trajectory file starts with a header line.
    #[arg(long)]
    pub header: bool,
    /// Project longitude/latitude degrees to metres (approximate).
    #[arg(long)]
    pub equirectangular: bool,
}

impl TrajectoryArgs {
    fn options(&self) -> IngestOptions {
        IngestOptions {
            format: self.traj_format,
            header: self.header,
            equirectangular: self.equirectangular,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "segments")]
    pub format: InputFormat,
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[command(flatten)]
    pub trajectory: TrajectoryArgs,
    /// Relative tolerance of the intersection predicates.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Lattice size of the oracle's candidate centres.
    #[arg(long, default_value_t = MIN_GRID_RESOLUTION)]
    pub grid_resolution: usize,
}

#[derive(Debug, Args)]
pub struct InsertSimArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `file`, or `shuffled:SEED`.
    #[arg(long, default_value = "file", value_parser = parse_order)]
    pub order: Order,
    /// Rebuild over the larger domain when a segment falls outside it,
    /// instead of skipping that segment.
    #[arg(long)]
    pub auto_renormalize: bool,
    /// Fix the domain to the whole input before the first insert.
    #[arg(long)]
    pub prefit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    File,
    Shuffled(u64),
}

fn parse_order(s: &str) -> Result<Order, String> {
    match s.split_once(':') {
        None if s == "file" => Ok(Order::File),
        Some(("shuffled", seed)) => seed
            .parse()
            .map(Order::Shuffled)
            .map_err(|_| format!("bad seed {seed:?}")),
        _ => Err(format!("expected `file` or `shuffled:SEED`, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsFactor {
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    #[value(name = "25")]
    TwentyFive,
    /// Exact oracle values, for small curves.
    Exact,
}

impl StatsFactor {
    fn algo(self) -> Algo {
        match self {
            StatsFactor::Three => Algo::Approx3Fast,
            StatsFactor::Four => Algo::Approx4,
            StatsFactor::TwentyFive => Algo::Approx25,
            StatsFactor::Exact => Algo::Oracle,
        }
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "4")]
    pub factor: StatsFactor,
    #[command(flatten)]
    pub trajectory: TrajectoryArgs,
    /// Dataset name for the table; defaults to the file stem.
    #[arg(long)]
    pub name: Option<String>,
    /// Keep a seeded uniform sample of at most this many curves.
    #[arg(long)]
    pub max_curves: Option<usize>,
    /// Seed for `--max-curves` sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Histogram bins.
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Write the histogram CSV here.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    /// Write per-curve `id,n,lambda_hat` rows here.
    #[arg(long)]
    pub per_curve: Option<PathBuf>,
    /// Print JSON instead of the table CSV.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, default_value_t = MIN_GRID_RESOLUTION)]
    pub grid_resolution: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Comma-separated segment counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Segments per star for the star family.
    #[arg(long, default_value_t = 8)]
    pub star_k: u32,
    /// Also time the quadratic 3-approximation.
    #[arg(long)]
    pub naive: bool,
    /// Print JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

/// Parses the arguments and runs the command, writing to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), AppError> {
    let pool = parallel::pool(parallel::thread_count(cli.threads));
    let omit = cli.omit_timing;
    match cli.command {
        Command::Estimate(a) => estimate(a, &pool, omit, out),
        Command::InsertSim(a) => insert_sim(a, omit, out),
        Command::Stats(a) => stats(a, &pool, omit, out),
        Command::Bench(a) => bench_cmd(a, omit, out),
    }
}

fn load(
    input: &Path,
    format: InputFormat,
    t: &TrajectoryArgs,
) -> Result<(Vec<Segment>, InputSummary), AppError> {
    match format {
        InputFormat::Segments => {
            let s = read_segments(input)?;
            let summary = InputSummary {
                segments: s.len(),
                ..Default::default()
            };
            Ok((s, summary))
        }
        InputFormat::Trajectories => {
            let got = trajectory::ingest(input, t.options())?;
            let mut all = Vec::new();
            for c in &got.curves {
                for s in c.segments()? {
                    all.push(s.with_id(all.len() as u32));
                }
            }
            let summary = InputSummary {
                segments: all.len(),
                curves: Some(got.curves.len()),
                skipped_curves: Some(got.skipped.len()),
            };
            Ok((all, summary))
        }
    }
}

fn estimate(
    a: EstimateArgs,
    pool: &rayon::ThreadPool,
    omit: bool,
    out: &mut dyn Write,
) -> Result<(), AppError> {
    check_eps(a.eps)?;
    let (segments, summary) = load(&a.input, a.format, &a.trajectory)?;
    let mut report = RunReport::new("estimate");
    report.algo = Some(a.algo);
    report.input_summary = summary;
    let start = Instant::now();
    if a.algo == Algo::Approx3Fast {
        let idx = DensityIndex::build_with_eps(&segments, a.eps)?;
        report.wall_time_ms = elapsed_ms(start, omit);
        report.estimate = Some(idx.estimate());
        let stats = idx.stats();
        report.peak_square_count = Some(stats.canonical_squares);
        report.index = Some(stats);
    } else {
        let e = pool.install(|| {
            a.algo
                .run(&segments, a.eps, a.grid_resolution, Rounds::Parallel)
        })?;
        report.wall_time_ms = elapsed_ms(start, omit);
        report.estimate = Some(e);
    }
    report.write(out)?;
    Ok(())
}

#[derive(Serialize)]
struct InsertEvent {
    index: usize,
    id: u32,
    /// `inserted`, `rebuilt` or `out_of_domain`.
    outcome: &'static str,
    value: u32,
    cumulative_ms: Option<f64>,
}

fn insert_sim(a: InsertSimArgs, omit: bool, out: &mut dyn Write) -> Result<(), AppError> {
    let mut segments = read_segments(&a.input)?;
    let mut report = RunReport::new("insert-sim");
    report.algo = Some(Algo::Approx3Fast);
    report.input_summary = InputSummary {
        segments: segments.len(),
        ..Default::default()
    };
    if let Order::Shuffled(seed) = a.order {
        segments.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        report.seed = Some(seed);
    }
    let mut idx = match (
        a.prefit,
        density_gauge_core::canonical::bounds_of(&segments),
    ) {
        (true, Some(b)) => DensityIndex::with_domain(&b, DEFAULT_EPS)?,
        _ => DensityIndex::new(),
    };
    let mut w = BufWriter::new(out);
    let start = Instant::now();
    for (k, s) in segments.iter().enumerate() {
        let outcome = match idx.insert(*s) {
            Ok(_) => "inserted",
            Err(QuadtreeError::OutOfDomain { required, .. }) if a.auto_renormalize => {
                let rect = AxisRect::new(
                    Point::new(required[0], required[1]),
                    Point::new(required[2], required[3]),
                );
                idx.rebuild_over(&rect)?;
                idx.insert(*s)?;
                "rebuilt"
            }
            Err(QuadtreeError::OutOfDomain { .. }) => {
                log::warn!("segment {} outside the domain, skipped", s.id());
                "out_of_domain"
            }
            Err(e) => return Err(e.into()),
        };
        let event = InsertEvent {
            index: k,
            id: s.id(),
            outcome,
            value: idx.estimate().value,
            cumulative_ms: elapsed_ms(start, omit),
        };
        writeln!(w, "{}", serde_json::to_string(&event).expect("plain data"))?;
    }
    report.wall_time_ms = elapsed_ms(start, omit);
    report.estimate = Some(idx.estimate());
    let stats = idx.stats();
    report.peak_square_count = Some(stats.canonical_squares);
    report.index = Some(stats);
    writeln!(w, "{}", report.to_json_line())?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct StatsOutput<'a> {
    report: &'a RunReport,
    stats: &'a trajectory::DatasetStats,
    histogram: &'a trajectory::Histogram,
}

fn stats(
    a: StatsArgs,
    pool: &rayon::ThreadPool,
    omit: bool,
    out: &mut dyn Write,
) -> Result<(), AppError> {
    check_eps(a.eps)?;
    let got = trajectory::ingest(&a.input, a.trajectory.options())?;
    let mut curves = got.curves;
    let mut report = RunReport::new("stats");
    if let Some(k) = a.max_curves {
        if curves.len() > k {
            let mut keep =
                index::sample(&mut ChaCha8Rng::seed_from_u64(a.seed), curves.len(), k).into_vec();
            keep.sort_unstable();
            curves = keep.into_iter().map(|i| curves[i].clone()).collect();
        }
        report.seed = Some(a.seed);
    }
    let algo = a.factor.algo();
    report.algo = Some(algo);
    report.input_summary = InputSummary {
        segments: curves.iter().map(|c| c.edge_count()).sum(),
        curves: Some(curves.len()),
        skipped_curves: Some(got.skipped.len()),
    };
    let name = a.name.clone().unwrap_or_else(|| {
        a.input
            .file_stem()
            .map_or("dataset".into(), |s| s.to_string_lossy().into_owned())
    });
    let start = Instant::now();
    let stats =
        pool.install(|| trajectory::dataset_stats(&name, &curves, algo, a.eps, a.grid_resolution))?;
    report.wall_time_ms = elapsed_ms(start, omit);
    let hist = trajectory::histogram(&stats, a.bins)?;
    if let Some(path) = &a.histogram {
        std::fs::write(path, hist.to_csv())?;
    }
    if let Some(path) = &a.per_curve {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "id,n,lambda_hat")?;
        for r in &stats.per_curve {
            writeln!(w, "{},{},{}", r.id, r.n, r.lambda_hat)?;
        }
        w.flush()?;
    }
    if a.json {
        let o = StatsOutput {
            report: &report,
            stats: &stats,
            histogram: &hist,
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&o).expect("plain data")
        )?;
    } else {
        writeln!(out, "{}", TABLE_COLUMNS.join(","))?;
        writeln!(out, "{}", stats.table_row().join(","))?;
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs, omit: bool, out: &mut dyn Write) -> Result<(), AppError> {
    let config = BenchConfig {
        family: a.family,
        sizes: a.sizes,
        seed: a.seed,
        repeats: a.repeats,
        star_k: a.star_k,
        naive: a.naive,
        omit_timing: omit,
    };
    let rows = bench::run(&config)?;
    if a.json {
        #[derive(Serialize)]
        struct BenchOutput<'a> {
            command: &'a str,
            seed: u64,
            repeats: usize,
            rows: &'a [bench::BenchRow],
        }
        let o = BenchOutput {
            command: "bench",
            seed: config.seed,
            repeats: config.repeats,
            rows: &rows,
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&o).expect("plain data")
        )?;
    } else {
        writeln!(out, "{}", bench::CSV_HEADER)?;
        for r in &rows {
            writeln!(out, "{}", r.to_csv())?;
        }
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<(), AppError> {
    if eps.is_finite() && (0.0..1e-3).contains(&eps) {
        Ok(())
    } else {
        Err(AppError::Usage(format!(
            "--eps must be in [0, 1e-3), got {eps}"
        )))
    }
}
