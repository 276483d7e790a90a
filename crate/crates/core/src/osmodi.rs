//! One-shot matrix omni-directional integration.
//!
//! Each cell `c` contributes one row
//!
//! ```text
//! p_c * sum_j w_j - sum_j w_j p_j = -sum_j |d_j| w_j (f_j(x_j) + f_j(x_c)) / 2
//! ```
//!
//! with `w_j = A_j / A_tot` over faces whose neighbour carries data, `d_j` the
//! centroid-to-centroid vector and `f_j` the source projected on `d_j`. `A_tot`
//! counts every face of the cell, including faces on voids and the boundary.
//! The system is singular (constants are in the null space) and is solved by
//! conjugate gradients started from zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{GradientField, ScalarSamples};
use crate::mesh::CellMesh;

/// Compressed-row sparse system.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Per-row factor that makes the matrix symmetric when applied from the
    /// left (the cell's total face area); 1 for identity rows.
    pub row_scale: Vec<f64>,
    /// Cells without source data.
    pub void: Vec<bool>,
    /// Cells with data but no data-bearing neighbour.
    pub isolated: Vec<usize>,
}

impl SparseSystem {
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *out = s;
        }
    }

    /// `y = A^T x`.
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for (r, &xr) in x.iter().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.cols[k]] += self.vals[k] * xr;
            }
        }
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                scale = scale.max(v.abs());
                if c != r {
                    worst = worst.max((v - self.entry(c, r)).abs());
                }
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Copy with every row multiplied by `s[r]` (matrix and right-hand side).
    pub fn scale_rows(&self, s: &[f64]) -> Self {
        let mut out = self.clone();
        for r in 0..self.n {
            for k in out.row_ptr[r]..out.row_ptr[r + 1] {
                out.vals[k] *= s[r];
            }
            out.rhs[r] *= s[r];
        }
        out
    }

    /// `(A + A^T) / 2` with the same right-hand side.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                out.vals[k] = 0.5 * (self.vals[k] + self.entry(c, r));
            }
        }
        out
    }
}

/// Assemble the integration system for `source` sampled at cell centroids.
/// NaN entries in `source` mark void cells.
pub fn assemble_osmodi(mesh: &CellMesh, source: &GradientField) -> Result<SparseSystem> {
    let n = mesh.n_cells();
    if source.len() != n {
        return Err(Error::Shape(format!("source has {} samples, mesh has {n} cells", source.len())));
    }
    let void: Vec<bool> = (0..n).map(|c| !source.is_valid(c)).collect();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut rhs = Vec::with_capacity(n);
    let mut row_scale = Vec::with_capacity(n);
    let mut isolated = Vec::new();
    row_ptr.push(0);
    for c in 0..n {
        let faces = mesh.faces(c);
        let data_faces: Vec<_> = faces
            .iter()
            .filter(|f| !f.is_boundary() && !void[f.neighbor])
            .collect();
        if void[c] || data_faces.is_empty() {
            if !void[c] {
                log::warn!("cell {c} has data but no data-bearing neighbour; using an identity row");
                isolated.push(c);
            }
            cols.push(c);
            vals.push(1.0);
            rhs.push(0.0);
            row_scale.push(1.0);
            row_ptr.push(cols.len());
            continue;
        }
        let a_tot: f64 = faces.iter().map(|f| f.length).sum();
        let gc = source.xy(c);
        let mut diag = 0.0;
        let mut b = 0.0;
        let diag_pos = cols.len();
        cols.push(c);
        vals.push(0.0);
        for f in data_faces {
            let w = f.length / a_tot;
            let dist = f.delta[0].hypot(f.delta[1]);
            let unit = [f.delta[0] / dist, f.delta[1] / dist];
            let gj = source.xy(f.neighbor);
            let fj = gj[0] * unit[0] + gj[1] * unit[1];
            let fc = gc[0] * unit[0] + gc[1] * unit[1];
            diag += w;
            cols.push(f.neighbor);
            vals.push(-w);
            b -= dist * w * 0.5 * (fj + fc);
        }
        vals[diag_pos] = diag;
        rhs.push(b);
        row_scale.push(a_tot);
        row_ptr.push(cols.len());
    }
    Ok(SparseSystem { n, row_ptr, cols, vals, rhs, row_scale, void, isolated })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgOptions {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// Diagonal preconditioning.
    pub jacobi: bool,
}

impl CgOptions {
    /// Tolerance 1e-10 and `10 n` iterations.
    pub fn for_size(n: usize) -> Self {
        Self { tol: 1e-10, max_iter: (10 * n).max(1), jacobi: false }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter < 1 {
            return Err(Error::InvalidParameter(format!("invalid CG options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `|b - Ax| / |b|`.
    pub residual: f64,
    pub converged: bool,
}

const SYMMETRY_TOL: f64 = 1e-10;
const DIVERGENCE_WINDOW: usize = 50;

/// Conjugate gradients from the zero vector on a symmetric system.
pub fn cg_solve(system: &SparseSystem, opts: &CgOptions) -> Result<CgResult> {
    opts.validate()?;
    if system.rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("right-hand side is not finite".into()));
    }
    let asym = system.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    let diag: Vec<f64> = (0..system.n).map(|r| system.entry(r, r)).collect();
    let apply = |x: &[f64], y: &mut [f64]| system.matvec(x, y);
    run_cg(apply, &system.rhs, &diag, opts)
}

/// CG on the normal equations `A^T A x = A^T b`.
pub fn cg_solve_normal(system: &SparseSystem, opts: &CgOptions) -> Result<CgResult> {
    opts.validate()?;
    let n = system.n;
    let mut atb = vec![0.0; n];
    system.matvec_transpose(&system.rhs, &mut atb);
    let mut diag = vec![0.0; n];
    for r in 0..n {
        for (c, v) in system.row(r) {
            diag[c] += v * v;
        }
    }
    let mut tmp = vec![0.0; n];
    let apply = |x: &[f64], y: &mut [f64]| {
        let mut t = std::mem::take(&mut tmp);
        system.matvec(x, &mut t);
        system.matvec_transpose(&t, y);
        tmp = t;
    };
    let mut res = run_cg(apply, &atb, &diag, opts)?;
    // Report the residual of the original system.
    let mut ax = vec![0.0; n];
    system.matvec(&res.x, &mut ax);
    let bn = norm2(&system.rhs);
    let rn = ax.iter().zip(&system.rhs).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt();
    res.residual = if bn > 0.0 { rn / bn } else { rn };
    Ok(res)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn run_cg(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    diag: &[f64],
    opts: &CgOptions,
) -> Result<CgResult> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bn = norm2(b);
    if bn == 0.0 {
        return Ok(CgResult { x, iterations: 0, residual: 0.0, converged: true });
    }
    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..n {
            z[i] = if opts.jacobi && diag[i] > 0.0 { r[i] / diag[i] } else { r[i] };
        }
    };
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    let mut growth = 0;
    for it in 1..=opts.max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // Breakdown: the search direction left the range of the operator.
            return Ok(CgResult { x, iterations: it - 1, residual: rel, converged: rel <= opts.tol });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let new_rel = norm2(&r) / bn;
        if !new_rel.is_finite() {
            return Err(Error::Divergence { iterations: it, residual: new_rel });
        }
        growth = if new_rel > rel { growth + 1 } else { 0 };
        rel = new_rel;
        if growth >= DIVERGENCE_WINDOW {
            return Err(Error::Divergence { iterations: it, residual: rel });
        }
        if rel <= opts.tol {
            return Ok(CgResult { x, iterations: it, residual: rel, converged: true });
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(CgResult { x, iterations: opts.max_iter, residual: rel, converged: false })
}

/// How the (possibly non-symmetric) system was brought to a symmetric one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveRoute {
    /// Assembled matrix already symmetric.
    Direct,
    /// Small asymmetry removed by averaging with the transpose.
    Averaged,
    /// Rows multiplied by the cell's total face area.
    RowScaled,
    /// CG on the normal equations.
    NormalEquations,
}

#[derive(Debug, Clone)]
pub struct OsmodiSolution {
    /// Zero-mean pressure per cell; NaN on void cells.
    pub pressure: ScalarSamples,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub route: SolveRoute,
    pub asymmetry: f64,
    pub isolated_cells: usize,
}

/// Connected components of data cells linked through data-bearing faces.
fn components(sys: &SparseSystem) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; sys.n];
    let mut comps = Vec::new();
    for s in 0..sys.n {
        if label[s] != usize::MAX || sys.void[s] {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        label[s] = id;
        let mut k = 0;
        while k < members.len() {
            let r = members[k];
            k += 1;
            for (c, _) in sys.row(r) {
                if label[c] == usize::MAX && !sys.void[c] {
                    label[c] = id;
                    members.push(c);
                }
            }
        }
        comps.push(members);
    }
    comps
}

/// Remove the part of the right-hand side that lies in the null space of a
/// symmetric system (constants on each connected component).
fn project_compatible(sys: &mut SparseSystem, comps: &[Vec<usize>]) {
    for comp in comps.iter().filter(|c| c.len() > 1) {
        let mean = comp.iter().map(|&r| sys.rhs[r]).sum::<f64>() / comp.len() as f64;
        for &r in comp {
            sys.rhs[r] -= mean;
        }
    }
}

/// Assemble, symmetrise and solve; the result is gauged to zero mean over
/// the data cells.
pub fn reconstruct_osmodi(mesh: &CellMesh, source: &GradientField, opts: &CgOptions) -> Result<OsmodiSolution> {
    let system = assemble_osmodi(mesh, source)?;
    let asymmetry = system.asymmetry();
    let comps = components(&system);
    let (route, result) = if asymmetry <= SYMMETRY_TOL {
        let mut s = system.clone();
        project_compatible(&mut s, &comps);
        (SolveRoute::Direct, cg_solve(&s, opts)?)
    } else if asymmetry < 1e-6 {
        let mut s = system.symmetrized();
        project_compatible(&mut s, &comps);
        (SolveRoute::Averaged, cg_solve(&s, opts)?)
    } else {
        let mut s = system.scale_rows(&system.row_scale);
        if s.asymmetry() <= SYMMETRY_TOL {
            project_compatible(&mut s, &comps);
            (SolveRoute::RowScaled, cg_solve(&s, opts)?)
        } else {
            (SolveRoute::NormalEquations, cg_solve_normal(&system, opts)?)
        }
    };
    if !result.converged {
        log::warn!(
            "CG stopped after {} iterations at relative residual {:.3e}",
            result.iterations,
            result.residual
        );
    }
    let valid: Vec<usize> = (0..system.n).filter(|&c| !system.void[c]).collect();
    let mean = if valid.is_empty() {
        0.0
    } else {
        valid.iter().map(|&c| result.x[c]).sum::<f64>() / valid.len() as f64
    };
    let pressure = (0..system.n)
        .map(|c| if system.void[c] { f64::NAN } else { result.x[c] - mean })
        .collect();
    Ok(OsmodiSolution {
        pressure: ScalarSamples::new(pressure),
        iterations: result.iterations,
        residual: result.residual,
        converged: result.converged,
        route,
        asymmetry,
        isolated_cells: system.isolated.len(),
    })
}
