//! Acceptance checks, one PASS/FAIL line per criterion.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, TAU};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use density_gauge::algo::Algo;
use density_gauge::bench::{median, time_fast, time_naive};
use density_gauge::families::{grid, random_low_density, star};
use density_gauge::trajectory::{self, IngestOptions, TrajectoryFormat, TABLE_COLUMNS};
use density_gauge_core::canonical::{
    bit_delta, canonical_cover, most_significant_separator, zorder_compare, Axis, CanonicalSquare,
    MAX_COVER_SQUARES,
};
use density_gauge_core::cover::{balls_for_triangle, triangular_grid, ApproxFactor, Orientation};
use density_gauge_core::geometry::{
    build_qs, dist2_point_segment, segment_intersects_rect, AxisRect,
};
use density_gauge_core::naive::{
    approx_density, oracle_density, oracle_density_touching, MIN_GRID_RESOLUTION,
};
use density_gauge_core::quadtree::{preprocess, DensityIndex, NodeId};
use density_gauge_core::{Point, QuadtreeError, Segment, DEFAULT_EPS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("factor sandwich on seeded families", factor_sandwich),
        ("triangle cover of T + B0", triangle_cover),
        ("canonical cover of Q_s", canonical_covers),
        ("bit_delta and most significant separator", separators),
        ("Z-order comparator", zorder),
        ("push-down lists against brute force", pushdown_lists),
        ("streaming insertion sandwich", streaming),
        ("empirical scaling", scaling),
        ("dataset statistics pipeline", dataset_pipeline),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let got = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {}", panic_message(&e))));
        let secs = start.elapsed().as_secs_f64();
        let tag = if got.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {}: {name}: {} [{secs:.1}s]",
            k + 1,
            got.detail
        );
        failed += usize::from(!got.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown".into())
}

// ---------------------------------------------------------------------------
// Instance families

#[derive(Clone, Copy, Debug)]
enum Kind {
    Star,
    Grid,
    Random,
}

struct Instance {
    kind: Kind,
    label: String,
    segments: Vec<Segment>,
    /// Density the construction guarantees, when it does.
    expected: Option<u32>,
}

/// Rotation, arbitrary scale and translation of a whole instance.
fn similarity(segments: &[Segment], rng: &mut ChaCha8Rng) -> Vec<Segment> {
    let angle = rng.gen_range(0.0..TAU);
    let scale = 2f64.powf(rng.gen_range(-4.0..4.0));
    let t = Point::new(rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3));
    segments
        .iter()
        .map(|s| s.map_points(|p| (p * scale).rotated(angle) + t).unwrap())
        .collect()
}

/// Unit segments on a lattice whose spacing keeps every pair more than two
/// lengths apart, so λ = 1.
fn separated_grid(n: usize, rng: &mut ChaCha8Rng) -> Vec<Segment> {
    let gap = rng.gen_range(3.5..12.0);
    let tilt = rng.gen_range(0.0..PI);
    let side = (n as f64).sqrt().ceil() as usize;
    (0..n)
        .map(|k| {
            let a = Point::new(gap * (k % side) as f64, gap * (k / side) as f64);
            Segment::new(k as u32, a, a + Point::new(1.0, 0.0).rotated(tilt)).unwrap()
        })
        .collect()
}

fn instance(kind: Kind, i: usize, max_n: usize, rng: &mut ChaCha8Rng) -> Instance {
    let (segments, expected, label) = match kind {
        Kind::Star => {
            let k = (i % 40) as u32 + 1;
            (
                star(k, Point::new(0.0, 0.0), 0),
                Some(k),
                format!("star-{k}"),
            )
        }
        Kind::Grid => {
            let n = rng.gen_range(1..=max_n);
            (separated_grid(n, rng), Some(1), format!("grid n={n}"))
        }
        Kind::Random => {
            let n = rng.gen_range(2..=max_n);
            (random_low_density(n, rng), None, format!("random n={n}"))
        }
    };
    Instance {
        kind,
        label,
        segments: similarity(&segments, rng),
        expected,
    }
}

fn families(seed: u64, per_family: usize, max_n: usize) -> Vec<Instance> {
    let mut rng = rng(seed);
    let mut out = Vec::new();
    for kind in [Kind::Star, Kind::Grid, Kind::Random] {
        for i in 0..per_family {
            out.push(instance(kind, i, max_n, &mut rng));
        }
    }
    out
}

fn oracle(s: &[Segment]) -> u32 {
    oracle_density(s, MIN_GRID_RESOLUTION, DEFAULT_EPS)
        .unwrap()
        .value
}

// ---------------------------------------------------------------------------
// 1

fn factor_sandwich() -> Outcome {
    let start = Instant::now();
    let instances = families(1, 100, 300);
    let mut violations = Vec::new();
    let mut checked = 0;
    for inst in &instances {
        let lambda = oracle(&inst.segments);
        if let Some(e) = inst.expected {
            if e != lambda {
                violations.push(format!(
                    "{}: oracle {lambda} != constructed {e}",
                    inst.label
                ));
            }
        }
        let fast = DensityIndex::build(&inst.segments).unwrap().estimate();
        let estimates = [
            (
                "25",
                approx_density(&inst.segments, ApproxFactor::TwentyFive, DEFAULT_EPS),
            ),
            (
                "4",
                approx_density(&inst.segments, ApproxFactor::Four, DEFAULT_EPS),
            ),
            (
                "3-naive",
                approx_density(&inst.segments, ApproxFactor::Three, DEFAULT_EPS),
            ),
            ("3-fast", fast),
        ];
        for (name, e) in estimates {
            checked += 1;
            if !e.within_sandwich(lambda) {
                violations.push(format!(
                    "{:?} {}: f={name} value {} λ={lambda}",
                    inst.kind, inst.label, e.value
                ));
            }
        }
    }
    let elapsed = start.elapsed();
    let fast_enough = elapsed < Duration::from_secs(120);
    outcome(
        violations.is_empty() && fast_enough,
        format!(
            "{} instances, {checked} estimates, {} violations{}, {:.1}s (limit 120s)",
            instances.len(),
            violations.len(),
            first(&violations),
            elapsed.as_secs_f64()
        ),
    )
}

fn first(v: &[String]) -> String {
    v.first()
        .map(|s| format!(" (first: {s})"))
        .unwrap_or_default()
}

// ---------------------------------------------------------------------------
// 2

fn dist_to_triangle(p: Point, v: [Point; 3]) -> f64 {
    let inside = (0..3).all(|k| (v[(k + 1) % 3] - v[k]).cross(p - v[k]) >= 0.0)
        || (0..3).all(|k| (v[(k + 1) % 3] - v[k]).cross(p - v[k]) <= 0.0);
    if inside {
        return 0.0;
    }
    (0..3)
        .map(|k| dist2_point_segment(p, v[k], v[(k + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

fn triangle_cover() -> Outcome {
    const TRIANGLES: usize = 24;
    const POINTS: usize = 100_000;
    let mut rng = rng(2);
    let mut uncovered = 0usize;
    let (mut up, mut down) = (0, 0);
    for t in 0..TRIANGLES {
        let a = Point::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let len = 2f64.powf(rng.gen_range(-6.0..6.0));
        let s = Segment::new(
            0,
            a,
            a + Point::new(len, 0.0).rotated(rng.gen_range(0.0..TAU)),
        )
        .unwrap();
        let cells = triangular_grid(&s);
        let cell = cells[2 * rng.gen_range(0..cells.len() / 2) + t % 2];
        match cell.orientation {
            Orientation::Up => up += 1,
            Orientation::Down => down += 1,
        }
        let r = s.length();
        let balls = balls_for_triangle(&cell, r);
        let v = cell.vertices();
        let lo = Point::new(
            v.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - r,
            v.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - r,
        );
        let hi = Point::new(
            v.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + r,
            v.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + r,
        );
        let mut taken = 0;
        while taken < POINTS {
            let p = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            if dist_to_triangle(p, v) > r {
                continue;
            }
            taken += 1;
            if !balls.iter().any(|b| b.contains(p, DEFAULT_EPS)) {
                uncovered += 1;
            }
        }
    }
    let constant = (PI / 6.0).cos() * (1.0 + 1.0 / (9.0 * 3f64.sqrt()));
    let constant_ok = (constant - 0.922).abs() < 1e-3;
    outcome(
        uncovered == 0 && constant_ok && up >= 10 && down >= 10,
        format!(
            "{TRIANGLES} triangles ({up} up, {down} down) x {POINTS} points, {uncovered} uncovered; \
             cos(pi/6)(1 + 1/(9 sqrt 3)) = {constant:.6}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 3

fn canonical_covers() -> Outcome {
    const SEGMENTS: usize = 1000;
    const POINTS_PER: usize = 100;
    let mut rng = rng(3);
    let (mut uncovered, mut too_big, mut too_many, mut closed_form_mismatch) = (0, 0, 0, 0);
    let mut max_count = 0;
    for _ in 0..SEGMENTS {
        let len = 10f64.powf(rng.gen_range(-5.0..-1.6));
        let margin = 2.5 * len + 1e-9;
        let c = Point::new(
            rng.gen_range(margin..1.0 - margin),
            rng.gen_range(margin..1.0 - margin),
        );
        let d = Point::new(0.5 * len, 0.0).rotated(rng.gen_range(0.0..TAU));
        let s = Segment::new(0, c - d, c + d).unwrap();
        let q = build_qs(&s).to_rect();
        let cover = canonical_cover(&q, s.length()).unwrap();
        max_count = max_count.max(cover.len());
        too_many += usize::from(cover.len() > MAX_COVER_SQUARES);
        too_big += cover.iter().filter(|c| c.side() > s.length()).count();
        let set: HashSet<CanonicalSquare> = cover.iter().copied().collect();
        let levels: HashSet<u32> = cover.iter().map(|c| c.level).collect();
        for _ in 0..POINTS_PER {
            let p = Point::new(
                rng.gen_range(q.min.x..q.max.x),
                rng.gen_range(q.min.y..q.max.y),
            );
            let hit = levels
                .iter()
                .any(|&l| set.contains(&CanonicalSquare::containing(p, l).unwrap()));
            uncovered += usize::from(!hit);
        }
        let mut fast = preprocess(&s).unwrap();
        fast.sort_by(zorder_compare);
        let mut reference = cover.clone();
        reference.sort_by(zorder_compare);
        closed_form_mismatch += usize::from(fast != reference);
    }
    outcome(
        uncovered + too_big + too_many + closed_form_mismatch == 0,
        format!(
            "{SEGMENTS} segments, {} points: {uncovered} uncovered, {too_big} oversized squares, \
             {too_many} covers over {MAX_COVER_SQUARES} (max {max_count}), \
             {closed_form_mismatch} index preprocess mismatches",
            SEGMENTS * POINTS_PER
        ),
    )
}

// ---------------------------------------------------------------------------
// 4

fn naive_bit_delta(mut a: f64, mut b: f64) -> u32 {
    // Doubling and subtracting one are exact for values in [0, 2).
    let mut i = 0;
    loop {
        i += 1;
        a *= 2.0;
        b *= 2.0;
        let (da, db) = (a >= 1.0, b >= 1.0);
        if da != db {
            return i;
        }
        if da {
            a -= 1.0;
            b -= 1.0;
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen::<f64>(),
        1 => rng.gen_range(0..1u64 << 20) as f64 / (1u64 << 20) as f64,
        2 => rng.gen::<f64>() * 2f64.powi(-rng.gen_range(0..1000)),
        _ => rng.gen_range(0..1u64 << 52) as f64 / (1u64 << 52) as f64,
    }
}

fn random_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a = random_unit(rng);
    let b = if rng.gen_bool(0.5) {
        // Share a long prefix: flip one mantissa bit.
        let bit = rng.gen_range(0..52);
        f64::from_bits(a.to_bits() ^ (1u64 << bit))
    } else {
        random_unit(rng)
    };
    (a, b)
}

fn exhaustive_separator(lo: f64, hi: f64) -> Option<(f64, u32, u64)> {
    for i in 1..=20u32 {
        let scale = (1u64 << i) as f64;
        let mut k = (lo * scale).ceil() as u64;
        if k % 2 == 0 {
            k += 1;
        }
        let value = k as f64 / scale;
        if k < 1u64 << i && value <= hi && value >= lo {
            return Some((value, i, k));
        }
    }
    None
}

fn separators() -> Outcome {
    const PAIRS: usize = 1_000_000;
    const INTERVALS: usize = 10_000;
    let mut rng = rng(4);
    let mut delta_mismatch = Vec::new();
    let mut pairs = 0;
    while pairs < PAIRS {
        let (a, b) = random_pair(&mut rng);
        if a == b || !(0.0..1.0).contains(&a) || !(0.0..1.0).contains(&b) {
            continue;
        }
        pairs += 1;
        let (got, want) = (bit_delta(a, b).unwrap(), naive_bit_delta(a, b));
        if got != want {
            delta_mismatch.push(format!("bit_delta({a:e}, {b:e}) = {got}, loop {want}"));
        }
    }
    let mut sep_mismatch = Vec::new();
    let min_width = 2f64.powi(-20);
    let mut intervals = 0;
    while intervals < INTERVALS {
        let grid = |rng: &mut ChaCha8Rng| rng.gen_range(0..=1u64 << 20) as f64 * min_width;
        let (mut lo, mut hi) = match rng.gen_range(0..3) {
            0 => (rng.gen::<f64>(), rng.gen::<f64>()),
            1 => (grid(&mut rng), grid(&mut rng)),
            _ => (grid(&mut rng), rng.gen::<f64>()),
        };
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        if hi - lo < min_width {
            continue;
        }
        intervals += 1;
        let want = exhaustive_separator(lo, hi);
        let axis = if intervals % 2 == 0 {
            Axis::Vertical
        } else {
            Axis::Horizontal
        };
        let got = most_significant_separator(lo, hi, axis)
            .ok()
            .map(|s| (s.value, s.significance, s.k));
        if got != want {
            sep_mismatch.push(format!("[{lo}, {hi}]: {got:?} vs scan {want:?}"));
        }
    }
    outcome(
        delta_mismatch.is_empty() && sep_mismatch.is_empty(),
        format!(
            "{PAIRS} bit_delta pairs, {} mismatches{}; {INTERVALS} separator intervals, {} mismatches{}",
            delta_mismatch.len(),
            first(&delta_mismatch),
            sep_mismatch.len(),
            first(&sep_mismatch)
        ),
    )
}

// ---------------------------------------------------------------------------
// 5

fn explicit_children(c: &CanonicalSquare) -> [CanonicalSquare; 4] {
    let (x, y, l) = (2 * c.kx, 2 * c.ky, c.level + 1);
    // Bottom-left, bottom-right, top-left, top-right.
    [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)]
        .map(|(kx, ky)| CanonicalSquare::new(l, kx, ky).unwrap())
}

fn explicit_ancestor(c: &CanonicalSquare, level: u32) -> CanonicalSquare {
    let shift = c.level - level;
    CanonicalSquare::new(level, c.kx >> shift, c.ky >> shift).unwrap()
}

fn dfs(
    c: CanonicalSquare,
    wanted: &HashSet<CanonicalSquare>,
    paths: &HashSet<CanonicalSquare>,
    out: &mut Vec<CanonicalSquare>,
) {
    if wanted.contains(&c) {
        out.push(c);
    }
    for child in explicit_children(&c) {
        if paths.contains(&child) {
            dfs(child, wanted, paths, out);
        }
    }
}

fn random_square(rng: &mut ChaCha8Rng, max_level: u32) -> CanonicalSquare {
    let level = rng.gen_range(0..=max_level);
    let mask = if level == 0 {
        0
    } else {
        u64::MAX >> (64 - level)
    };
    CanonicalSquare::new(level, rng.gen::<u64>() & mask, rng.gen::<u64>() & mask).unwrap()
}

fn zorder() -> Outcome {
    let mut rng = rng(5);
    let mut squares: Vec<CanonicalSquare> = Vec::new();
    let mut wanted = HashSet::new();
    while squares.len() < 1000 {
        let c = if !squares.is_empty() && rng.gen_bool(0.3) {
            let base = squares[rng.gen_range(0..squares.len())];
            explicit_ancestor(&base, rng.gen_range(0..=base.level))
        } else {
            random_square(&mut rng, 14)
        };
        if wanted.insert(c) {
            squares.push(c);
        }
    }
    let mut paths = HashSet::new();
    for c in &wanted {
        for l in 0..=c.level {
            paths.insert(explicit_ancestor(c, l));
        }
    }
    let mut expected = Vec::new();
    dfs(CanonicalSquare::UNIT, &wanted, &paths, &mut expected);
    let mut by_cmp: Vec<CanonicalSquare> = wanted.iter().copied().collect();
    by_cmp.sort_by(zorder_compare);
    let mut by_key = by_cmp.clone();
    by_key.sort_by_key(|c| c.zorder_key());
    let order_ok = by_cmp == expected && by_key == expected;

    let mut violations = Vec::new();
    for _ in 0..100_000 {
        let a = random_square(&mut rng, 53);
        let related = |rng: &mut ChaCha8Rng, base: &CanonicalSquare| match rng.gen_range(0..3) {
            0 => explicit_ancestor(base, rng.gen_range(0..=base.level)),
            1 => *base,
            _ => random_square(rng, 53),
        };
        let b = related(&mut rng, &a);
        let c = related(&mut rng, &b);
        let (ab, ba, bc, ac) = (
            zorder_compare(&a, &b),
            zorder_compare(&b, &a),
            zorder_compare(&b, &c),
            zorder_compare(&a, &c),
        );
        if ab != ba.reverse() {
            violations.push(format!("antisymmetry {a:?} {b:?}"));
        }
        if (ab == Ordering::Equal) != (a == b) {
            violations.push(format!("equality {a:?} {b:?}"));
        }
        if ab != Ordering::Greater && bc != Ordering::Greater && ac == Ordering::Greater {
            violations.push(format!("transitivity {a:?} {b:?} {c:?}"));
        }
        if ab != a.zorder_key().cmp(&b.zorder_key()) {
            violations.push(format!("key disagrees {a:?} {b:?}"));
        }
    }
    outcome(
        order_ok && violations.is_empty(),
        format!(
            "{} distinct squares, DFS order {}; 100000 triples, {} property violations{}",
            wanted.len(),
            if order_ok { "matches" } else { "differs" },
            violations.len(),
            first(&violations)
        ),
    )
}

// ---------------------------------------------------------------------------
// 6

fn pushdown_lists() -> Outcome {
    let mut mismatches = Vec::new();
    let mut nodes_checked = 0;
    for seed in 0..50u64 {
        let mut rng = rng(600 + seed);
        let n = rng.gen_range(1..=200);
        let segments = match seed % 3 {
            0 => {
                let k = rng.gen_range(1..=12u32);
                let mut out = Vec::new();
                while out.len() < n {
                    let c = Point::new(rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0));
                    out.extend(star(k, c, out.len() as u32));
                }
                out.truncate(n);
                similarity(&out, &mut rng)
            }
            1 => similarity(&separated_grid(n, &mut rng), &mut rng),
            _ => random_low_density(n, &mut rng),
        };
        let idx = DensityIndex::build(&segments).unwrap();
        if let Err(e) = idx.check_invariants() {
            mismatches.push(format!("seed {seed}: {e}"));
        }
        let norm = idx.normalized_segments();
        let mut threshold: HashMap<CanonicalSquare, f64> = HashMap::new();
        for s in norm {
            for q in preprocess(s).unwrap() {
                let t = threshold.entry(q).or_insert(f64::INFINITY);
                *t = t.min(s.length());
            }
        }
        let mut by_length: Vec<u32> = (0..norm.len() as u32).collect();
        by_length.sort_by(|&a, &b| {
            norm[b as usize]
                .length()
                .total_cmp(&norm[a as usize].length())
                .then(a.cmp(&b))
        });
        let mut canonical_nodes = 0;
        for (v, node) in idx.nodes().iter().enumerate() {
            nodes_checked += 1;
            let sq = node.square();
            let tau = threshold.get(&sq).copied().unwrap_or(f64::INFINITY);
            canonical_nodes += usize::from(tau.is_finite());
            let rect = sq.to_rect();
            let tol = 4.0 * DEFAULT_EPS * sq.side();
            let expected: Vec<u32> = by_length
                .iter()
                .copied()
                .filter(|&j| {
                    let s = &norm[j as usize];
                    s.length() >= tau && segment_intersects_rect(s, &rect, tol)
                })
                .collect();
            if idx.intersecting(v as NodeId) != expected.as_slice() {
                mismatches.push(format!("seed {seed} node {v}"));
            }
            if tau.is_finite() && node.threshold() != tau {
                mismatches.push(format!("seed {seed} node {v} threshold"));
            }
        }
        if canonical_nodes != threshold.len() {
            mismatches.push(format!(
                "seed {seed}: {canonical_nodes} canonical nodes for {} distinct squares",
                threshold.len()
            ));
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "50 seeds, {nodes_checked} nodes, {} mismatches{}",
            mismatches.len(),
            first(&mismatches)
        ),
    )
}

// ---------------------------------------------------------------------------
// 7

fn insert_or_rebuild(idx: &mut DensityIndex, s: Segment) -> u32 {
    match idx.insert(s) {
        Ok(e) => e.value,
        Err(QuadtreeError::OutOfDomain { required, .. }) => {
            let rect = AxisRect::new(
                Point::new(required[0], required[1]),
                Point::new(required[2], required[3]),
            );
            idx.rebuild_over(&rect).unwrap();
            idx.insert(s).unwrap().value
        }
        Err(e) => panic!("insert failed: {e}"),
    }
}

fn streaming() -> Outcome {
    let instances = families(7, 100, 120);
    let mut violations = Vec::new();
    let mut prefixes = 0;
    for inst in &instances {
        let s = &inst.segments;
        let mut idx = DensityIndex::new();
        let (mut lambda, mut last) = (0, 0);
        for j in 0..s.len() {
            let touching =
                oracle_density_touching(&s[..=j], j, MIN_GRID_RESOLUTION, DEFAULT_EPS).unwrap();
            lambda = lambda.max(touching.value);
            let value = insert_or_rebuild(&mut idx, s[j]);
            prefixes += 1;
            if value < last {
                violations.push(format!(
                    "{}: prefix {j} dropped {last} -> {value}",
                    inst.label
                ));
            }
            if value != idx.estimate().value {
                violations.push(format!(
                    "{}: prefix {j} reported value differs from estimate",
                    inst.label
                ));
            }
            if !(lambda.div_ceil(3) <= value && value <= lambda) {
                violations.push(format!(
                    "{}: prefix {j} value {value} λ={lambda}",
                    inst.label
                ));
            }
            last = value;
        }
        if let Some(e) = inst.expected {
            if lambda != e {
                violations.push(format!(
                    "{}: streamed oracle {lambda} != constructed {e}",
                    inst.label
                ));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{} instances, {prefixes} prefixes, {} violations{}",
            instances.len(),
            violations.len(),
            first(&violations)
        ),
    )
}

// ---------------------------------------------------------------------------
// 8

fn fast_time(segments: &[Segment]) -> Duration {
    let start = Instant::now();
    let (_, idx) = time_fast(segments).unwrap();
    std::hint::black_box(idx.estimate());
    let elapsed = start.elapsed();
    drop(idx);
    elapsed
}

fn scaling() -> Outcome {
    let (g20, g40) = (grid(20_000), grid(40_000));
    let (mut t20, mut t40) = (Vec::new(), Vec::new());
    for _ in 0..3 {
        t20.push(fast_time(&g20));
        t40.push(fast_time(&g40));
    }
    let (m20, m40) = (median(t20), median(t40));
    let ratio = m40.as_secs_f64() / m20.as_secs_f64();

    let g5 = grid(5000);
    let (mut fast, mut naive, mut naive_estimate) = (Vec::new(), Vec::new(), 0);
    for _ in 0..3 {
        fast.push(fast_time(&g5));
        let (t, e) = time_naive(&g5);
        naive.push(t);
        naive_estimate = e.value;
    }
    let (mf, mn) = (median(fast), median(naive));
    let speedup = mn.as_secs_f64() / mf.as_secs_f64();
    let fast_estimate = DensityIndex::build(&g5).unwrap().estimate().value;
    outcome(
        ratio <= 3.0 && speedup >= 5.0,
        format!(
            "grid 20k {:.1} ms, 40k {:.1} ms, ratio {ratio:.2} (limit 3.0); n=5000 fast {:.1} ms, \
             naive {:.1} ms, naive/fast {speedup:.1}x (need 5x); estimates {fast_estimate}/{naive_estimate}",
            ms(m20),
            ms(m40),
            ms(mf),
            ms(mn)
        ),
    )
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

// ---------------------------------------------------------------------------
// 9

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn dataset_pipeline() -> Outcome {
    let mut problems = Vec::new();
    let opts = IngestOptions {
        format: TrajectoryFormat::CsvXy,
        header: true,
        equirectangular: false,
    };
    let ingested = trajectory::ingest(&data("synthetic_curves.csv"), opts).unwrap();
    if !ingested.skipped.is_empty() {
        problems.push(format!("{} curves skipped", ingested.skipped.len()));
    }
    let stats = trajectory::dataset_stats(
        "synthetic_curves",
        &ingested.curves,
        Algo::Oracle,
        DEFAULT_EPS,
        MIN_GRID_RESOLUTION,
    )
    .unwrap();

    let fixture = read_csv(&data("synthetic_curves_lambda.csv"));
    let certified: Vec<(String, usize, u32)> = fixture[1..]
        .iter()
        .map(|r| (r[0].clone(), r[1].parse().unwrap(), r[2].parse().unwrap()))
        .collect();
    let computed: Vec<(String, usize, u32)> = stats
        .per_curve
        .iter()
        .map(|r| (r.id.clone(), r.n, r.lambda_hat))
        .collect();
    if computed != certified {
        problems.push("per-curve values differ from the certified fixture".into());
    }

    let expected = read_csv(&data("synthetic_curves_expected.csv"));
    if expected[0] != TABLE_COLUMNS.to_vec() {
        problems.push(format!(
            "table columns {:?} vs {:?}",
            TABLE_COLUMNS, expected[0]
        ));
    }
    if stats.table_row().to_vec() != expected[1] {
        problems.push(format!(
            "table row {:?} vs {:?}",
            stats.table_row(),
            expected[1]
        ));
    }
    let exact: HashMap<&str, f64> = expected[2..]
        .iter()
        .map(|r| (r[0].as_str(), r[1].parse().unwrap()))
        .collect();
    if stats.median_lambda != exact["median_exact"] {
        problems.push(format!(
            "median {} vs {}",
            stats.median_lambda, exact["median_exact"]
        ));
    }
    if stats.median_lambda_over_n != exact["median_lambda_over_n_exact"] {
        problems.push(format!(
            "median λ/n {} vs {}",
            stats.median_lambda_over_n, exact["median_lambda_over_n_exact"]
        ));
    }

    let script = rerun_script(&stats, &expected);
    match &script {
        Ok(_) => {}
        Err(e) => problems.push(e.clone()),
    }

    let hist = trajectory::histogram(&stats, 10).unwrap();
    let total: u64 = hist.counts.iter().sum();
    if total != stats.curve_count as u64 || stats.curve_count != 50 {
        problems.push(format!(
            "histogram sums to {total} for {} curves",
            stats.curve_count
        ));
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} curves, row {:?}, histogram total {total}, script {}; {} problems{}",
            stats.curve_count,
            stats.table_row().join(","),
            script.unwrap_or_else(|_| "failed".into()),
            problems.len(),
            first(&problems)
        ),
    )
}

/// Feeds the freshly computed per-curve values to the summary script and
/// compares its output with the bundled expectation.
fn rerun_script(
    stats: &trajectory::DatasetStats,
    expected: &[Vec<String>],
) -> Result<String, String> {
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/table_stats.py");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("per_curve.csv");
    let mut body = String::from("id,n,lambda\n");
    for r in &stats.per_curve {
        body.push_str(&format!("{},{},{}\n", r.id, r.n, r.lambda_hat));
    }
    std::fs::write(&input, body).map_err(|e| e.to_string())?;
    let out = match std::process::Command::new("python3")
        .arg(&script)
        .arg(&input)
        .args(["--name", "synthetic_curves"])
        .output()
    {
        Ok(o) => o,
        Err(_) => return Ok("skipped (python3 unavailable)".into()),
    };
    if !out.status.success() {
        return Err(format!(
            "script failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let got: Vec<Vec<String>> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    if got != expected {
        return Err(format!(
            "script output {got:?} differs from the bundled expectation"
        ));
    }
    Ok("rerun matches".into())
}
