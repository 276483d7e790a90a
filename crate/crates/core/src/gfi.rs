//! Green's-function integral reconstruction in two dimensions.
//!
//! Boundary midpoints satisfy
//!
//! ```text
//! p_k + (1/pi) sum_k' p_k' (r_kk' . dS_k') / r_kk'^2 = (1/pi) sum_j (g_j . r_kj) / r_kj^2 dV_j
//! ```
//!
//! and interior points are then evaluated with the same sums at half weight.
//! `r_ab = x_a - x_b`, `dS` is the outward normal times the element length and
//! `dV` the cell area. All integrals use the one-point midpoint rule.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{GradientField, ScalarSamples};
use crate::mesh::CellMesh;

const COINCIDENT: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct BoundarySystem {
    pub n_b: usize,
    /// Double-layer part alone; its diagonal is zero.
    pub double_layer: DMatrix<f64>,
    /// `I + double_layer`.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

fn check_source(mesh: &CellMesh, source: &GradientField) -> Result<()> {
    if source.len() != mesh.n_cells() {
        return Err(Error::Shape(format!(
            "source has {} samples, mesh has {} cells",
            source.len(),
            mesh.n_cells()
        )));
    }
    Ok(())
}

/// `sum_j (g_j . (x - x_j)) / |x - x_j|^2 dV_j` over data cells, skipping `skip`.
fn volume_sum(mesh: &CellMesh, source: &GradientField, x: [f64; 2], skip: Option<usize>) -> Result<f64> {
    let mut s = 0.0;
    for (j, (c, dv)) in mesh.centroids().iter().zip(mesh.areas()).enumerate() {
        if Some(j) == skip || !source.is_valid(j) {
            continue;
        }
        let r = [x[0] - c[0], x[1] - c[1]];
        let r2 = r[0] * r[0] + r[1] * r[1];
        if r2.sqrt() < COINCIDENT {
            return Err(Error::CoincidentPoints(format!("target ({}, {}) coincides with cell {j}", x[0], x[1])));
        }
        let g = source.xy(j);
        s += (g[0] * r[0] + g[1] * r[1]) / r2 * dv;
    }
    Ok(s)
}

pub fn assemble_gfi_boundary(mesh: &CellMesh, source: &GradientField) -> Result<BoundarySystem> {
    check_source(mesh, source)?;
    if !mesh.boundary_is_closed() {
        return Err(Error::OpenBoundary("mesh boundary elements do not form closed loops".into()));
    }
    let b = mesh.boundary();
    let n_b = b.len();
    let inv_pi = std::f64::consts::FRAC_1_PI;
    let mut kernel = DMatrix::zeros(n_b, n_b);
    for k in 0..n_b {
        for kp in 0..n_b {
            if kp == k {
                continue;
            }
            let r = [b[k].midpoint[0] - b[kp].midpoint[0], b[k].midpoint[1] - b[kp].midpoint[1]];
            let r2 = r[0] * r[0] + r[1] * r[1];
            if r2.sqrt() < COINCIDENT {
                return Err(Error::CoincidentPoints(format!("boundary elements {k} and {kp} share a midpoint")));
            }
            let ds = [b[kp].normal[0] * b[kp].length, b[kp].normal[1] * b[kp].length];
            kernel[(k, kp)] = inv_pi * (r[0] * ds[0] + r[1] * ds[1]) / r2;
        }
    }
    let rhs: Vec<f64> = b
        .par_iter()
        .map(|e| volume_sum(mesh, source, e.midpoint, None).map(|s| inv_pi * s))
        .collect::<Result<_>>()?;
    let matrix = DMatrix::identity(n_b, n_b) + &kernel;
    Ok(BoundarySystem { n_b, double_layer: kernel, matrix, rhs: DVector::from_vec(rhs) })
}

#[derive(Debug, Clone)]
pub struct BoundarySolution {
    /// Zero-mean boundary pressures.
    pub pressures: Vec<f64>,
    /// Minimum-norm least-squares solution before the gauge shift.
    pub raw: Vec<f64>,
    /// `|M p - rhs| / |rhs|` of the raw solution.
    pub residual: f64,
    pub rank: usize,
}

const RANK_TOL: f64 = 1e-12;

/// Minimum-norm least-squares solve followed by a zero-mean gauge.
pub fn solve_gfi(system: &BoundarySystem) -> Result<BoundarySolution> {
    let n = system.n_b;
    let svd = system.matrix.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = RANK_TOL * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    if rank + 2 < n {
        return Err(Error::RankDeficient { rank, n });
    }
    let x = svd.solve(&system.rhs, eps).map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let r = &system.matrix * &x - &system.rhs;
    let bn = system.rhs.norm();
    let residual = if bn > 0.0 { r.norm() / bn } else { r.norm() };
    let raw: Vec<f64> = x.iter().copied().collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    Ok(BoundarySolution { pressures: raw.iter().map(|v| v - mean).collect(), raw, residual, rank })
}

/// Pressure at every data-cell centroid; void cells are NaN.
pub fn evaluate_gfi_interior(mesh: &CellMesh, source: &GradientField, boundary_p: &[f64]) -> Result<ScalarSamples> {
    check_source(mesh, source)?;
    let b = mesh.boundary();
    if boundary_p.len() != b.len() {
        return Err(Error::Shape(format!(
            "{} boundary pressures for {} elements",
            boundary_p.len(),
            b.len()
        )));
    }
    let inv_2pi = 0.5 * std::f64::consts::FRAC_1_PI;
    let values: Vec<f64> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|i| {
            if !source.is_valid(i) {
                return Ok(f64::NAN);
            }
            let x = mesh.centroids()[i];
            let vol = volume_sum(mesh, source, x, Some(i))?;
            let mut dbl = 0.0;
            for (k, e) in b.iter().enumerate() {
                let r = [x[0] - e.midpoint[0], x[1] - e.midpoint[1]];
                let r2 = r[0] * r[0] + r[1] * r[1];
                if r2.sqrt() < COINCIDENT {
                    return Err(Error::CoincidentPoints(format!("cell {i} sits on boundary element {k}")));
                }
                dbl += boundary_p[k] * (r[0] * e.normal[0] + r[1] * e.normal[1]) * e.length / r2;
            }
            Ok(inv_2pi * (vol - dbl))
        })
        .collect::<Result<_>>()?;
    Ok(ScalarSamples::new(values))
}

#[derive(Debug, Clone)]
pub struct GfiSolution {
    /// Zero-mean pressure at cell centroids (NaN on voids).
    pub pressure: ScalarSamples,
    pub boundary: BoundarySolution,
}

pub fn reconstruct_gfi(mesh: &CellMesh, source: &GradientField) -> Result<GfiSolution> {
    let system = assemble_gfi_boundary(mesh, source)?;
    let boundary = solve_gfi(&system)?;
    let mut pressure = evaluate_gfi_interior(mesh, source, &boundary.pressures)?;
    let valid: Vec<f64> = pressure.values.iter().copied().filter(|v| v.is_finite()).collect();
    if !valid.is_empty() {
        let mean = valid.iter().sum::<f64>() / valid.len() as f64;
        pressure.values.iter_mut().for_each(|v| *v -= mean);
    }
    Ok(GfiSolution { pressure, boundary })
}
