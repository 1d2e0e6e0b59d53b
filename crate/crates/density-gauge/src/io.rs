//! Segment files: one `x1,y1,x2,y2` record per line, optional header.
//!
//! A first line whose fields are not all numbers is taken as a header. Ids
//! are assigned by record order, starting at 0.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use density_gauge_core::{Point, Segment};

use crate::error::AppError;

pub fn read_segments(path: &Path) -> Result<Vec<Segment>, AppError> {
    let file = File::open(path).map_err(|source| AppError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_segments(file, path)
}

pub fn parse_segments(reader: impl Read, path: &Path) -> Result<Vec<Segment>, AppError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(k as u64 + 1, |p| p.line());
            AppError::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if k == 0 => continue,
            Err(e) => return Err(AppError::parse(path, line, format!("not a number: {e}"))),
        };
        if values.len() != 4 {
            return Err(AppError::parse(
                path,
                line,
                format!("expected 4 fields x1,y1,x2,y2, found {}", values.len()),
            ));
        }
        let id = out.len() as u32;
        let s = Segment::new(
            id,
            Point::new(values[0], values[1]),
            Point::new(values[2], values[3]),
        )
        .map_err(|e| AppError::parse(path, line, e.to_string()))?;
        out.push(s);
    }
    Ok(out)
}

/// Writes `segments` with a header, coordinates in shortest round-trip form.
pub fn write_segments(mut w: impl Write, segments: &[Segment]) -> std::io::Result<()> {
    writeln!(w, "x1,y1,x2,y2")?;
    for s in segments {
        writeln!(w, "{},{},{},{}", s.a().x, s.a().y, s.b().x, s.b().y)?;
    }
    Ok(())
}
