use serde::Serialize;

use super::{CellKind, CellMesh};
use crate::error::{Error, Result};

/// Circumradius, inradius and their normalised ratio for one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleQuality {
    pub circumradius: f64,
    pub inradius: f64,
    pub aspect_ratio: f64,
}

impl TriangleQuality {
    pub fn of(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Self {
        let la = (b[0] - c[0]).hypot(b[1] - c[1]);
        let lb = (a[0] - c[0]).hypot(a[1] - c[1]);
        let lc = (a[0] - b[0]).hypot(a[1] - b[1]);
        let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
        let lmax = la.max(lb).max(lc);
        if !(area > 1e-14 * lmax * lmax) {
            return Self { circumradius: f64::INFINITY, inradius: 0.0, aspect_ratio: f64::INFINITY };
        }
        let s = 0.5 * (la + lb + lc);
        let circumradius = la * lb * lc / (4.0 * area);
        let inradius = area / s;
        Self { circumradius, inradius, aspect_ratio: circumradius / (2.0 * inradius) }
    }
}

/// R / (2r): 1 for an equilateral triangle, +inf for a degenerate one.
pub fn aspect_ratio(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    TriangleQuality::of(a, b, c).aspect_ratio
}

pub fn triangle_qualities(mesh: &CellMesh) -> Result<Vec<TriangleQuality>> {
    if mesh.kind() != CellKind::Triangle {
        return Err(Error::Unsupported("quality metrics need an all-triangle mesh".into()));
    }
    let v = mesh.vertices();
    Ok(mesh.cells().iter().map(|t| TriangleQuality::of(v[t[0]], v[t[1]], v[t[2]])).collect())
}

/// Counts of aspect ratios in equal-width bins over `[1, saturation]`; the
/// last bin also takes everything above `saturation`, including infinity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl QualityHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lower,upper,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", self.edges[k], self.edges[k + 1], c));
        }
        s
    }
}

/// Histogram with unit-width bins from 1 up to `saturation`.
pub fn quality_histogram(mesh: &CellMesh, saturation: f64) -> Result<QualityHistogram> {
    if !(saturation > 1.0) {
        return Err(Error::InvalidParameter(format!("saturation must exceed 1, got {saturation}")));
    }
    let ratios: Vec<f64> = triangle_qualities(mesh)?.iter().map(|q| q.aspect_ratio).collect();
    let nbins = (saturation - 1.0).ceil() as usize;
    let width = (saturation - 1.0) / nbins as f64;
    let edges: Vec<f64> = (0..=nbins).map(|k| 1.0 + width * k as f64).collect();
    let mut counts = vec![0; nbins];
    for r in ratios {
        let k = if r.is_finite() { ((r - 1.0) / width).floor().max(0.0) as usize } else { nbins };
        counts[k.min(nbins - 1)] += 1;
    }
    Ok(QualityHistogram { edges, counts })
}

/// Fraction of triangles with aspect ratio strictly above `threshold`.
pub fn fraction_above(mesh: &CellMesh, threshold: f64) -> Result<f64> {
    let q = triangle_qualities(mesh)?;
    Ok(q.iter().filter(|t| t.aspect_ratio > threshold).count() as f64 / q.len() as f64)
}
