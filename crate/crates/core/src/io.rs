//! CSV field files and JSON sidecars.
//!
//! Field CSV: header `x,y,v0[,v1[,v2]]`, one sample per row, missing values
//! written as `nan`. Grid metadata lives next to it as `{nx, ny, h, origin}`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{CartesianGrid2, PointSet2, ScalarSamples, VectorSamples};

/// Points plus one to three value columns.
#[derive(Debug, Clone)]
pub struct FieldTable {
    pub points: PointSet2,
    pub columns: Vec<Vec<f64>>,
}

impl FieldTable {
    pub fn scalar(&self) -> Result<ScalarSamples> {
        match self.columns.first() {
            Some(c) => Ok(ScalarSamples::new(c.clone())),
            None => Err(Error::Shape("field file has no value columns".into())),
        }
    }

    pub fn vector(&self) -> Result<VectorSamples> {
        let dim = self.columns.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::Shape(format!("expected 2 or 3 value columns, found {dim}")));
        }
        let n = self.points.len();
        let mut values = Vec::with_capacity(n * dim);
        for i in 0..n {
            for c in &self.columns {
                values.push(c[i]);
            }
        }
        VectorSamples::new(dim, values)
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), message: message.into() }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        // Shortest round-trip representation.
        format!("{v:?}")
    }
}

pub fn write_field_csv(path: &Path, points: &PointSet2, columns: &[&[f64]]) -> Result<()> {
    for c in columns {
        if c.len() != points.len() {
            return Err(Error::Shape(format!("column of {} values for {} points", c.len(), points.len())));
        }
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = String::from("x,y");
    for k in 0..columns.len() {
        header.push_str(&format!(",v{k}"));
    }
    writeln!(w, "{header}").map_err(|e| io_err(path, e))?;
    for (i, p) in points.coords().iter().enumerate() {
        let mut line = format!("{},{}", fmt_value(p[0]), fmt_value(p[1]));
        for c in columns {
            line.push(',');
            line.push_str(&fmt_value(c[i]));
        }
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_scalar_csv(path: &Path, points: &PointSet2, s: &ScalarSamples) -> Result<()> {
    write_field_csv(path, points, &[&s.values])
}

pub fn write_vector_csv(path: &Path, points: &PointSet2, v: &VectorSamples) -> Result<()> {
    let cols: Vec<Vec<f64>> = (0..v.dim()).map(|c| v.component(c).values).collect();
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    write_field_csv(path, points, &refs)
}

pub fn read_field_csv(path: &Path) -> Result<FieldTable> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(BufReader::new(file));
    let headers = rdr.headers().map_err(|e| parse_err(path, e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(parse_err(path, "header must start with x,y"));
    }
    for (k, h) in headers.iter().skip(2).enumerate() {
        if h != format!("v{k}") {
            return Err(parse_err(path, format!("unexpected column `{h}`, expected v{k}")));
        }
    }
    let ncol = headers.len() - 2;
    if ncol > 3 {
        return Err(parse_err(path, "at most three value columns are supported"));
    }
    let mut coords = Vec::new();
    let mut columns = vec![Vec::new(); ncol];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            let s = rec.get(k).unwrap_or("");
            s.parse::<f64>()
                .map_err(|_| parse_err(path, format!("row {}: bad number `{s}`", row + 2)))
        };
        coords.push([num(0)?, num(1)?]);
        for (k, col) in columns.iter_mut().enumerate() {
            col.push(num(k + 2)?);
        }
    }
    let points = PointSet2::new(coords).map_err(|e| parse_err(path, e.to_string()))?;
    Ok(FieldTable { points, columns })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| parse_err(path, e.to_string()))?;
    writeln!(w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| parse_err(path, e.to_string()))
}

pub fn write_grid_sidecar(path: &Path, grid: &CartesianGrid2) -> Result<()> {
    write_json(path, grid)
}

pub fn read_grid_sidecar(path: &Path) -> Result<CartesianGrid2> {
    let grid: CartesianGrid2 = read_json(path)?;
    grid.validate().map_err(|e| parse_err(path, e.to_string()))?;
    Ok(grid)
}

/// Binary 8-bit PGM heat map of a grid field; NaN maps to 0 and finite values
/// are scaled into 1..=255. Returns the `(min, max)` used for scaling.
pub fn write_pgm(path: &Path, grid: &CartesianGrid2, field: &ScalarSamples) -> Result<(f64, f64)> {
    if field.len() != grid.len() {
        return Err(Error::Shape("field does not match grid".into()));
    }
    let finite = field.values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut bytes = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    // Image rows run top to bottom, so flip y.
    for j in (0..grid.ny).rev() {
        for i in 0..grid.nx {
            let v = field.values[grid.index(i, j)];
            let b = if v.is_finite() { 1 + ((v - lo) / span * 254.0).round() as u8 } else { 0 };
            bytes.push(b);
        }
    }
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))?;
    Ok((lo, hi))
}
