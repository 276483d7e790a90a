//! End-to-end runs: build data and mesh, reconstruct with each method, score
//! against truth and write artifacts.
//!
//! Every run is driven by a [`RunConfig`]. [`RunConfig::resolve`] fills all
//! defaulted seeds from the global seed, and the resolved config is what gets
//! embedded in every artifact.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{bilinear_resample, CartesianGrid2, GradientField, PointSet2, ScalarSamples, VectorSamples};
use crate::geometry::Bounds;
use crate::io;
use crate::mesh::{cartesian_cell_mesh, delaunay_triangulate, CellMesh};
use crate::metrics::{self, spearman, SpectrumTable};
use crate::osmodi::{self, CgOptions};
use crate::rng::derive_seed;
use crate::siren::{self, GradientDataset, SirenConfig, TrainConfig};
use crate::synth::{self, NoiseSpec, TaylorGreenParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseSpec,
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_methods() -> Vec<MethodSpec> {
    vec![MethodSpec::Osmodi { tol: None, max_iter: None }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CaseSpec {
    /// Taylor-Green vortex on the square `[-half_width, half_width]^2`.
    TaylorGreen {
        #[serde(default)]
        params: TaylorGreenParams,
        #[serde(default)]
        time: f64,
        #[serde(default = "default_half_width")]
        half_width: f64,
        #[serde(default)]
        source: SourceSpec,
    },
    /// Gradient samples from disk: CSV `x,y,gx,gy`. With a grid sidecar the
    /// points must be the grid nodes in row-major order and the Cartesian
    /// mesh is used; otherwise the points are triangulated and sources are
    /// averaged onto the cells.
    External {
        source: PathBuf,
        #[serde(default)]
        truth: Option<PathBuf>,
        #[serde(default)]
        grid: Option<PathBuf>,
    },
}

fn default_half_width() -> f64 {
    std::f64::consts::PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    /// Exact pressure gradient.
    #[default]
    Analytic,
    /// Gradient from the momentum balance of three (optionally noisy)
    /// velocity snapshots `dt` apart, on a grid of `aux_n` nodes per side
    /// when the mesh is not Cartesian.
    Momentum {
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default)]
        noise_level: f64,
        #[serde(default)]
        noise_seed: Option<u64>,
        #[serde(default = "default_direction_dim")]
        direction_dim: usize,
        #[serde(default = "default_aux_n")]
        aux_n: usize,
    },
}

fn default_dt() -> f64 {
    0.05
}
fn default_direction_dim() -> usize {
    3
}
fn default_aux_n() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    /// `n x n` nodes; each node is a cell centre. `periodic` drops the
    /// duplicate last node so the grid spans exactly one period.
    Cartesian {
        n: usize,
        #[serde(default)]
        periodic: bool,
    },
    /// Delaunay mesh of an `n x n` lattice with interior points jittered by
    /// Normal(0, (eps_fraction * spacing)^2).
    Perturbed {
        n: usize,
        #[serde(default = "default_eps_fraction")]
        eps_fraction: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Delaunay mesh of `n` uniform random points.
    Random {
        n: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self::Cartesian { n: 100, periodic: false }
    }
}

/// Jitter of 4e-4 on a 2 pi / 1024 lattice, as a fraction of the spacing.
pub fn default_eps_fraction() -> f64 {
    4e-4 / (std::f64::consts::TAU / 1024.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Osmodi {
        #[serde(default)]
        tol: Option<f64>,
        #[serde(default)]
        max_iter: Option<usize>,
    },
    Gfi {},
    Siren {
        #[serde(default = "default_arch")]
        arch: String,
        /// Derived from the data extent with factor `c` when absent.
        #[serde(default)]
        omega0: Option<f64>,
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_omega_hidden")]
        omega_hidden: f64,
        #[serde(default = "default_epochs")]
        epochs: usize,
        #[serde(default = "default_lr")]
        lr: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn default_arch() -> String {
    "1x64".into()
}
fn default_c() -> f64 {
    2.0
}
fn default_omega_hidden() -> f64 {
    30.0
}
fn default_epochs() -> usize {
    2000
}
fn default_lr() -> f64 {
    3e-5
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Osmodi { .. } => "osmodi",
            Self::Gfi {} => "gfi",
            Self::Siren { .. } => "siren",
        }
    }

    /// SIREN with every hyperparameter at its default.
    pub fn siren_default() -> Self {
        Self::Siren {
            arch: default_arch(),
            omega0: None,
            c: default_c(),
            omega_hidden: default_omega_hidden(),
            epochs: default_epochs(),
            lr: default_lr(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// PGM maps of pressure and error (Cartesian meshes only).
    #[serde(default)]
    pub heatmaps: bool,
    /// Radial spectra and transfer functions (periodic grids with truth only).
    #[serde(default)]
    pub spectrum: bool,
}

impl RunConfig {
    pub fn taylor_green(mesh: MeshSpec, methods: Vec<MethodSpec>) -> Self {
        Self {
            case: CaseSpec::TaylorGreen {
                params: TaylorGreenParams::default(),
                time: 0.0,
                half_width: default_half_width(),
                source: SourceSpec::Analytic,
            },
            mesh,
            methods,
            output: OutputSpec::default(),
            seed: 0,
        }
    }

    /// Fill every unset seed from the global seed and check parameters.
    pub fn resolve(&self) -> Result<Self> {
        let mut c = self.clone();
        let seed = c.seed;
        if c.methods.is_empty() {
            return Err(Error::InvalidParameter("config lists no methods".into()));
        }
        match &mut c.case {
            CaseSpec::TaylorGreen { params, half_width, source, .. } => {
                params.validate()?;
                if !(*half_width > 0.0) {
                    return Err(Error::InvalidParameter("half_width must be positive".into()));
                }
                if let SourceSpec::Momentum { dt, noise_level, noise_seed, direction_dim, aux_n } = source {
                    if !(*dt > 0.0) || !(*noise_level >= 0.0) || !(2..=3).contains(direction_dim) || *aux_n < 4 {
                        return Err(Error::InvalidParameter("invalid momentum source settings".into()));
                    }
                    noise_seed.get_or_insert(derive_seed(seed, 1));
                }
            }
            CaseSpec::External { source, truth, grid } => {
                for p in std::iter::once(&*source).chain(truth.iter()).chain(grid.iter()) {
                    if !p.exists() {
                        return Err(Error::Io {
                            path: p.display().to_string(),
                            source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                        });
                    }
                }
            }
        }
        match &mut c.mesh {
            MeshSpec::Cartesian { n, .. } if *n < 3 => {
                return Err(Error::InvalidParameter("cartesian mesh needs n >= 3".into()));
            }
            MeshSpec::Perturbed { n, eps_fraction, seed: s } => {
                if *n < 3 || !(*eps_fraction >= 0.0) {
                    return Err(Error::InvalidParameter("perturbed mesh needs n >= 3 and eps_fraction >= 0".into()));
                }
                s.get_or_insert(derive_seed(seed, 2));
            }
            MeshSpec::Random { n, seed: s } => {
                if *n < 3 {
                    return Err(Error::InvalidParameter("random mesh needs n >= 3".into()));
                }
                s.get_or_insert(derive_seed(seed, 3));
            }
            MeshSpec::Cartesian { .. } => {}
        }
        for m in &mut c.methods {
            match m {
                MethodSpec::Siren { arch, c: factor, omega_hidden, epochs, lr, seed: s, omega0 } => {
                    SirenConfig::from_arch(arch, omega0.unwrap_or(1.0), *omega_hidden, 0)?;
                    TrainConfig { learning_rate: *lr, epochs: *epochs, ..TrainConfig::default() }.validate()?;
                    if omega0.is_none() && !(*factor > 0.0) {
                        return Err(Error::InvalidParameter("siren factor c must be positive".into()));
                    }
                    s.get_or_insert(derive_seed(seed, 4));
                }
                MethodSpec::Osmodi { tol, max_iter } => {
                    if tol.is_some_and(|t| !(t > 0.0)) || *max_iter == Some(0) {
                        return Err(Error::InvalidParameter("invalid osmodi solver options".into()));
                    }
                }
                MethodSpec::Gfi {} => {}
            }
        }
        Ok(c)
    }
}

/// Mesh, data and (optionally) truth, all at the cell centres.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Absent when only the mesh-free method will run.
    pub mesh: Option<CellMesh>,
    pub grid: Option<CartesianGrid2>,
    /// Cell centres: where the source lives and where pressure is reported.
    pub points: PointSet2,
    pub source: GradientField,
    pub truth: Option<ScalarSamples>,
    /// Training set for the mesh-free method.
    pub train_points: PointSet2,
    pub train_source: GradientField,
}

fn geometry(mesh: &MeshSpec, domain: Bounds) -> Result<(CellMesh, Option<CartesianGrid2>)> {
    let side = domain.width();
    match mesh {
        MeshSpec::Cartesian { n, periodic } => {
            let grid = if *periodic {
                CartesianGrid2::periodic(*n, *n, side / *n as f64, domain.min)?
            } else {
                CartesianGrid2::new(*n, *n, side / (*n - 1) as f64, domain.min)?
            };
            Ok((cartesian_cell_mesh(&grid)?, Some(grid)))
        }
        MeshSpec::Perturbed { n, eps_fraction, seed } => {
            let eps = eps_fraction * side / (*n - 1) as f64;
            let s = synth::seed_perturbed_grid(*n, domain, eps, seed.unwrap_or(0))?;
            Ok((delaunay_triangulate(&s.points)?, None))
        }
        MeshSpec::Random { n, seed } => {
            let s = synth::seed_uniform_random_in(*n, domain, seed.unwrap_or(0))?;
            Ok((delaunay_triangulate(&s.points)?, None))
        }
    }
}

/// Momentum-balance source at `targets` from noisy snapshots on `grid`.
fn momentum_on_grid(
    params: &TaylorGreenParams,
    grid: &CartesianGrid2,
    time: f64,
    dt: f64,
    noise: (f64, u64, usize),
) -> Result<VectorSamples> {
    let pts = grid.points();
    let snaps: Vec<VectorSamples> = (0..3)
        .map(|k| {
            let t = time + (k as f64 - 1.0) * dt;
            let vel = synth::taylor_green_eval(params, &pts, t).velocity;
            let spec = NoiseSpec { level: noise.0, rng_seed: derive_seed(noise.1, k), direction_dim: noise.2 };
            synth::add_noise(&vel, &spec)
        })
        .collect::<Result<_>>()?;
    synth::momentum_source(grid, &snaps[0], &snaps[1], &snaps[2], dt, params.rho, params.mu())
}

/// Build mesh, source and truth for a resolved config.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    match &config.case {
        CaseSpec::TaylorGreen { params, time, half_width, source } => {
            let domain = Bounds::centered_square(2.0 * half_width);
            let (mesh, grid) = geometry(&config.mesh, domain)?;
            let points = mesh.centroid_points();
            let exact = synth::taylor_green_eval(params, &points, *time);
            let source = match source {
                SourceSpec::Analytic => exact.pressure_gradient,
                SourceSpec::Momentum { dt, noise_level, noise_seed, direction_dim, aux_n } => {
                    let noise = (*noise_level, noise_seed.unwrap_or(0), *direction_dim);
                    match &grid {
                        Some(g) => momentum_on_grid(params, g, *time, *dt, noise)?,
                        None => {
                            let aux = CartesianGrid2::new(*aux_n, *aux_n, domain.width() / (*aux_n - 1) as f64, domain.min)?;
                            let s = momentum_on_grid(params, &aux, *time, *dt, noise)?;
                            let gx = bilinear_resample(&aux, &s.component(0), &points)?;
                            let gy = bilinear_resample(&aux, &s.component(1), &points)?;
                            let pairs: Vec<[f64; 2]> = gx.values.iter().zip(&gy.values).map(|(&a, &b)| [a, b]).collect();
                            VectorSamples::from_pairs(&pairs)
                        }
                    }
                }
            };
            Ok(Prepared {
                train_points: points.clone(),
                train_source: source.clone(),
                mesh: Some(mesh),
                grid,
                points,
                source,
                truth: Some(exact.pressure),
            })
        }
        CaseSpec::External { source, truth, grid } => {
            let table = io::read_field_csv(source)?;
            let g = table.vector()?;
            let truth_vals = match truth {
                Some(p) => Some(io::read_field_csv(p)?.scalar()?),
                None => None,
            };
            if let Some(t) = &truth_vals {
                if t.len() != table.points.len() {
                    return Err(Error::Shape("truth and source have different point counts".into()));
                }
            }
            match grid {
                Some(gpath) => {
                    let grid = io::read_grid_sidecar(gpath)?;
                    if grid.len() != table.points.len() {
                        return Err(Error::Shape(format!(
                            "grid has {} nodes but source has {} points",
                            grid.len(),
                            table.points.len()
                        )));
                    }
                    let mesh = cartesian_cell_mesh(&grid)?;
                    let points = mesh.centroid_points();
                    Ok(Prepared {
                        train_points: table.points.clone(),
                        train_source: g.clone(),
                        mesh: Some(mesh),
                        grid: Some(grid),
                        points,
                        source: g,
                        truth: truth_vals,
                    })
                }
                None => {
                    let mesh = delaunay_triangulate(&table.points)?;
                    let cell_source = mesh.vertex_to_cell_average(&g)?;
                    let cell_truth = match &truth_vals {
                        Some(t) => {
                            let as_vec = VectorSamples::new(1, t.values.clone())?;
                            Some(mesh.vertex_to_cell_average(&as_vec)?.component(0))
                        }
                        None => None,
                    };
                    Ok(Prepared {
                        points: mesh.centroid_points(),
                        mesh: Some(mesh),
                        grid: None,
                        source: cell_source,
                        truth: cell_truth,
                        train_points: table.points,
                        train_source: g,
                    })
                }
            }
        }
    }
}

/// Solver-specific numbers; absent fields do not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extrapolated_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub method: String,
    /// Gauge-aligned pressure at the cell centres.
    #[serde(skip)]
    pub pressure: ScalarSamples,
    /// Constant added to the raw reconstruction.
    pub gauge_offset: f64,
    /// `truth_mean` when aligned against truth, else `zero_mean`.
    pub gauge: String,
    pub relative_mae: Option<f64>,
    pub max_abs_error: Option<f64>,
    pub valid_points: usize,
    pub diagnostics: Diagnostics,
    /// Seconds; kept out of the report file so reruns compare byte for byte.
    #[serde(skip)]
    pub wall_time_s: f64,
    /// Loss per epoch for the network method.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
    #[serde(skip)]
    pub model: Option<siren::SirenModel>,
}

fn finish(
    method: &str,
    raw: ScalarSamples,
    truth: Option<&ScalarSamples>,
    diagnostics: Diagnostics,
    start: Instant,
) -> Result<ReconstructionReport> {
    let (pressure, gauge_offset, gauge) = match truth {
        Some(t) => {
            let (p, o) = metrics::align_gauge(&raw, t)?;
            (p, o, "truth_mean")
        }
        None => {
            let (p, o) = metrics::zero_mean(&raw);
            (p, o, "zero_mean")
        }
    };
    let (relative_mae, max_abs_error) = match truth {
        Some(t) => {
            let e = metrics::error_map(&pressure, t)?;
            let max = e.values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(*v));
            (Some(metrics::relative_mae(&pressure, t)?), Some(max))
        }
        None => (None, None),
    };
    Ok(ReconstructionReport {
        method: method.into(),
        valid_points: pressure.valid_count(),
        pressure,
        gauge_offset,
        gauge: gauge.into(),
        relative_mae,
        max_abs_error,
        diagnostics,
        wall_time_s: start.elapsed().as_secs_f64(),
        loss_history: Vec::new(),
        model: None,
    })
}

/// Run one method on prepared data.
pub fn run_method(prep: &Prepared, method: &MethodSpec) -> Result<ReconstructionReport> {
    let start = Instant::now();
    let truth = prep.truth.as_ref();
    let mesh = || prep.mesh.as_ref().ok_or_else(|| Error::Unsupported(format!("{} needs a mesh", method.name())));
    match method {
        MethodSpec::Osmodi { tol, max_iter } => {
            let mesh = mesh()?;
            let mut opts = CgOptions::for_size(mesh.n_cells());
            if let Some(t) = tol {
                opts.tol = *t;
            }
            if let Some(m) = max_iter {
                opts.max_iter = *m;
            }
            let sol = osmodi::reconstruct_osmodi(mesh, &prep.source, &opts)?;
            let route = serde_json::to_value(sol.route).ok().and_then(|v| v.as_str().map(String::from));
            let d = Diagnostics {
                iterations: Some(sol.iterations),
                residual: Some(sol.residual),
                converged: Some(sol.converged),
                route,
                ..Diagnostics::default()
            };
            finish("osmodi", sol.pressure, truth, d, start)
        }
        MethodSpec::Gfi {} => {
            let sol = crate::gfi::reconstruct_gfi(mesh()?, &prep.source)?;
            let d = Diagnostics {
                residual: Some(sol.boundary.residual),
                rank: Some(sol.boundary.rank),
                ..Diagnostics::default()
            };
            finish("gfi", sol.pressure, truth, d, start)
        }
        MethodSpec::Siren { arch, omega0, c, omega_hidden, epochs, lr, seed } => {
            let data = GradientDataset::new(&prep.train_points, &prep.train_source)?;
            let omega0 = match omega0 {
                Some(w) => *w,
                None => {
                    let (lo, hi) = prep.train_points.bounds();
                    siren::omega0_heuristic(hi[0] - lo[0], hi[1] - lo[1], *c)?
                }
            };
            let cfg = SirenConfig::from_arch(arch, omega0, *omega_hidden, seed.unwrap_or(0))?;
            let tc = TrainConfig { learning_rate: *lr, epochs: *epochs, ..TrainConfig::default() };
            let out = siren::train(&cfg, &tc, &data)?;
            let ev = siren::evaluate(&out.model, &prep.points);
            let d = Diagnostics {
                omega0: Some(omega0),
                initial_loss: out.history.first().copied(),
                final_loss: out.history.last().copied(),
                extrapolated_points: Some(ev.extrapolated.iter().filter(|&&e| e).count()),
                ..Diagnostics::default()
            };
            let mut report = finish("siren", ev.values, truth, d, start)?;
            report.loss_history = out.history;
            report.model = Some(out.model);
            Ok(report)
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub config: RunConfig,
    pub prepared: Prepared,
    pub reports: Vec<ReconstructionReport>,
    pub spectra: Vec<(String, SpectrumTable)>,
}

/// One row of the combined table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub relative_mae: Option<f64>,
    pub max_abs_error: Option<f64>,
}

impl PipelineOutput {
    pub fn summary(&self) -> Vec<SummaryRow> {
        self.reports
            .iter()
            .map(|r| SummaryRow { method: r.method.clone(), relative_mae: r.relative_mae, max_abs_error: r.max_abs_error })
            .collect()
    }
}

/// Resolve, prepare and run every method; write artifacts when an output
/// directory is configured.
pub fn run_pipeline(config: &RunConfig) -> Result<PipelineOutput> {
    let config = config.resolve()?;
    let prepared = prepare(&config)?;
    let reports = config.methods.iter().map(|m| run_method(&prepared, m)).collect::<Result<Vec<_>>>()?;
    let mut spectra = Vec::new();
    if config.output.spectrum {
        if let (Some(grid), Some(truth)) = (prepared.grid.as_ref().filter(|g| g.periodic), &prepared.truth) {
            for r in &reports {
                spectra.push((r.method.clone(), metrics::transfer_function(grid, &r.pressure, truth)?));
            }
        }
    }
    let out = PipelineOutput { config, prepared, reports, spectra };
    if let Some(dir) = &out.config.output.dir {
        write_artifacts(&out, dir)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    toolkit_version: &'a str,
    config: &'a RunConfig,
    report: &'a ReconstructionReport,
}

#[derive(Serialize)]
struct Timing<'a> {
    method: &'a str,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct HeatmapRange {
    file: String,
    min: f64,
    max: f64,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".into(), |x| format!("{x:?}"))
}

/// Everything except `timings.json` is a pure function of the config.
pub fn write_artifacts(out: &PipelineOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let prep = &out.prepared;
    io::write_json(&dir.join("config.resolved.json"), &out.config)?;
    if let Some(t) = &prep.truth {
        io::write_scalar_csv(&dir.join("truth.csv"), &prep.points, t)?;
    }
    let mut ranges = Vec::new();
    for r in &out.reports {
        io::write_scalar_csv(&dir.join(format!("p_{}.csv", r.method)), &prep.points, &r.pressure)?;
        let file = ReportFile { toolkit_version: VERSION, config: &out.config, report: r };
        io::write_json(&dir.join(format!("report_{}.json", r.method)), &file)?;
        if !r.loss_history.is_empty() {
            let mut s = String::from("epoch,loss\n");
            for (k, l) in r.loss_history.iter().enumerate() {
                s.push_str(&format!("{k},{l:?}\n"));
            }
            let p = dir.join("loss_siren.csv");
            std::fs::write(&p, s).map_err(|e| io_err(&p, e))?;
        }
        if let (true, Some(grid)) = (out.config.output.heatmaps, &prep.grid) {
            let name = format!("p_{}.pgm", r.method);
            let (min, max) = io::write_pgm(&dir.join(&name), grid, &r.pressure)?;
            ranges.push(HeatmapRange { file: name, min, max });
            if let Some(t) = &prep.truth {
                let name = format!("err_{}.pgm", r.method);
                let (min, max) = io::write_pgm(&dir.join(&name), grid, &metrics::error_map(&r.pressure, t)?)?;
                ranges.push(HeatmapRange { file: name, min, max });
            }
        }
    }
    if !ranges.is_empty() {
        io::write_json(&dir.join("heatmaps.json"), &ranges)?;
    }
    for (m, table) in &out.spectra {
        let p = dir.join(format!("spectrum_{m}.csv"));
        std::fs::write(&p, table.to_csv()).map_err(|e| io_err(&p, e))?;
    }
    let mut s = String::from("method,relative_mae,max_abs_error\n");
    for row in out.summary() {
        s.push_str(&format!("{},{},{}\n", row.method, fmt_opt(row.relative_mae), fmt_opt(row.max_abs_error)));
    }
    let p = dir.join("summary.csv");
    std::fs::write(&p, s).map_err(|e| io_err(&p, e))?;
    let timings: Vec<Timing> = out.reports.iter().map(|r| Timing { method: &r.method, wall_time_s: r.wall_time_s }).collect();
    io::write_json(&dir.join("timings.json"), &timings)
}

/// Noise sweep over velocity-noise levels and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Taylor-Green case; its source is replaced by a momentum source at
    /// each level.
    pub base: RunConfig,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

pub fn default_levels() -> Vec<f64> {
    vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.10]
}

pub fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub level: f64,
    pub seed: u64,
    pub relative_mae: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub method: String,
    pub level: f64,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
    /// Spearman correlation of level against mean relative MAE, per method.
    pub spearman: Vec<(String, Option<f64>)>,
}

impl SweepResult {
    pub fn rows_csv(&self) -> String {
        let mut s = String::from("method,level,seed,relative_mae,error\n");
        for r in &self.rows {
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            s.push_str(&format!("{},{:?},{},{},{}\n", r.method, r.level, r.seed, fmt_opt(r.relative_mae), err));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("method,level,mean,min,max,runs\n");
        for r in &self.summary {
            s.push_str(&format!(
                "{},{:?},{},{},{},{}\n",
                r.method,
                r.level,
                fmt_opt(r.mean),
                fmt_opt(r.min),
                fmt_opt(r.max),
                r.runs
            ));
        }
        s
    }
}

/// Every (level, seed) cell runs every method; a failed run is recorded on
/// its row. Cells run in parallel and are collected in a fixed order.
pub fn noise_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let base = config.base.resolve()?;
    if !matches!(base.case, CaseSpec::TaylorGreen { .. }) {
        return Err(Error::InvalidParameter("noise sweep needs a Taylor-Green case".into()));
    }
    if config.levels.is_empty() || config.seeds.is_empty() {
        return Err(Error::InvalidParameter("noise sweep needs levels and seeds".into()));
    }
    let cells: Vec<(f64, u64)> = config.levels.iter().flat_map(|&l| config.seeds.iter().map(move |&s| (l, s))).collect();
    let per_cell: Vec<Vec<SweepRow>> = cells
        .par_iter()
        .map(|&(level, seed)| {
            let mut cfg = base.clone();
            if let CaseSpec::TaylorGreen { source, .. } = &mut cfg.case {
                *source = SourceSpec::Momentum {
                    dt: config.dt,
                    noise_level: level,
                    noise_seed: Some(seed),
                    direction_dim: default_direction_dim(),
                    aux_n: default_aux_n(),
                };
            }
            let row = |method: &str, r: Result<f64>| SweepRow {
                method: method.into(),
                level,
                seed,
                relative_mae: r.as_ref().ok().copied(),
                error: r.err().map(|e| e.to_string()),
            };
            match prepare(&cfg) {
                Ok(prep) => cfg
                    .methods
                    .iter()
                    .map(|m| {
                        let r = run_method(&prep, m)
                            .and_then(|rep| rep.relative_mae.ok_or(Error::DegenerateNormalization));
                        row(m.name(), r)
                    })
                    .collect(),
                Err(e) => {
                    let msg = e.to_string();
                    cfg.methods
                        .iter()
                        .map(|m| SweepRow { error: Some(msg.clone()), ..row(m.name(), Err(Error::EmptyField)) })
                        .collect()
                }
            }
        })
        .collect();
    let rows: Vec<SweepRow> = per_cell.into_iter().flatten().collect();

    let mut summary = Vec::new();
    let mut corr = Vec::new();
    for m in &base.methods {
        let name = m.name();
        let mut means = Vec::new();
        for &level in &config.levels {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == name && r.level == level)
                .filter_map(|r| r.relative_mae)
                .collect();
            let mean = (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
            if let Some(m) = mean {
                means.push((level, m));
            }
            summary.push(SweepSummary {
                method: name.into(),
                level,
                mean,
                min: v.iter().copied().reduce(f64::min),
                max: v.iter().copied().reduce(f64::max),
                runs: v.len(),
            });
        }
        let (l, m): (Vec<f64>, Vec<f64>) = means.into_iter().unzip();
        corr.push((name.to_string(), spearman(&l, &m)));
    }
    Ok(SweepResult { rows, summary, spearman: corr })
}
