//! `pressrec`: generate data, build meshes, reconstruct pressure and analyse
//! the results from the command line.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 solver error.
//! Failures print one JSON object on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pressrec::fields::{CartesianGrid2, PointSet2, ScalarSamples, VectorSamples};
use pressrec::io;
use pressrec::mesh::{cartesian_cell_mesh, delaunay_triangulate, fraction_above, quality_histogram, CellKind, CellMesh, MeshJson};
use pressrec::metrics;
use pressrec::pipeline::{self, CaseSpec, MeshSpec, MethodSpec, Prepared, RunConfig, SourceSpec, SweepConfig};
use pressrec::synth::TaylorGreenParams;

mod lattice;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] pressrec::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use pressrec::Error as E;
        match self {
            Self::Usage(_) => 2,
            Self::Core(e) => match e {
                E::InvalidParameter(_) | E::Io { .. } | E::Parse { .. } | E::Shape(_) | E::Unsupported(_) => 2,
                _ => 3,
            },
        }
    }

    fn kind(&self) -> &'static str {
        if self.exit_code() == 2 {
            "config"
        } else {
            "solver"
        }
    }

    fn path(&self) -> Option<&str> {
        match self {
            Self::Core(pressrec::Error::Io { path, .. } | pressrec::Error::Parse { path, .. }) => Some(path),
            _ => None,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "pressrec", version, about = "Pressure reconstruction from pressure-gradient samples")]
struct Cli {
    /// Global seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "PRESSREC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a Taylor-Green case: mesh, gradient source and truth.
    Gen(GenArgs),
    /// Triangulate points (or grid a sidecar) and report triangle quality.
    Mesh(MeshArgs),
    /// Reconstruct pressure from a gradient file with one method.
    Reconstruct(ReconArgs),
    /// Noise sweep from a JSON config.
    Sweep(SweepArgs),
    /// Radial spectrum and transfer function of a reconstruction.
    Spectrum(SpectrumArgs),
    /// Full pipeline from a JSON run config: reports, tables and maps.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeshKind {
    Cartesian,
    Perturbed,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceKind {
    Analytic,
    Momentum,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "cartesian")]
    mesh: MeshKind,
    /// Nodes per side (cartesian, perturbed).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Point count for random meshes; defaults to n * n.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    periodic: bool,
    #[arg(long, default_value_t = pipeline::default_eps_fraction())]
    eps_fraction: f64,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    half_width: f64,
    #[arg(long, default_value_t = 0.0)]
    time: f64,
    #[arg(long, value_enum, default_value = "analytic")]
    source: SourceKind,
    #[arg(long, default_value_t = 0.0)]
    noise_level: f64,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
}

#[derive(Debug, Args)]
struct MeshArgs {
    /// CSV whose first two columns are point coordinates.
    #[arg(long, conflicts_with = "grid")]
    points: Option<PathBuf>,
    /// Grid sidecar JSON; builds the Cartesian cell mesh.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Quality ratio above which triangles count as poor.
    #[arg(long, default_value_t = 3.0)]
    threshold: f64,
    /// Last histogram bin edge.
    #[arg(long, default_value_t = 10.0)]
    saturation: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Osmodi,
    Gfi,
    Siren,
}

#[derive(Debug, Args)]
struct ReconArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// CSV `x,y,gx,gy`.
    #[arg(long)]
    source: PathBuf,
    #[arg(long, conflicts_with = "grid")]
    mesh: Option<PathBuf>,
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Ground-truth pressure at the output points, for gauge and error.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Evaluation points for the network method (defaults to the source points).
    #[arg(long)]
    eval_points: Option<PathBuf>,
    /// Report JSON path; defaults to the output path with `.report.json`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Save the trained network as JSON.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value = "1x64")]
    arch: String,
    #[arg(long)]
    omega0: Option<f64>,
    /// Factor for the omega0 heuristic when --omega0 is absent.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[arg(long, default_value_t = 30.0)]
    omega_hidden: f64,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    #[arg(long, default_value_t = 3e-5)]
    lr: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    recon: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Periodic grid sidecar; inferred from the point lattice when absent.
    #[arg(long)]
    grid: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return fail(&CliError::Usage(e.kind().to_string()));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    let body = serde_json::json!({
        "error": e.kind(),
        "exit_code": e.exit_code(),
        "message": e.to_string(),
        "path": e.path(),
    });
    eprintln!("{body}");
    ExitCode::from(e.exit_code())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let seed = cli.seed;
    let out = cli.out;
    match cli.command {
        Command::Gen(a) => gen(a, seed, out),
        Command::Mesh(a) => mesh(a, out),
        Command::Reconstruct(a) => reconstruct(a, seed, out),
        Command::Sweep(a) => sweep(a, seed, out),
        Command::Spectrum(a) => spectrum(a, out),
        Command::Report(a) => report(a, seed, out),
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn need_out(out: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    out.ok_or_else(|| CliError::Usage(format!("--out is required for {what}")))
}

fn mkdir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| pressrec::Error::Io { path: dir.display().to_string(), source: e })?;
    Ok(())
}

fn gen(a: GenArgs, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let dir = need_out(out, "gen")?;
    let mesh = match a.mesh {
        MeshKind::Cartesian => MeshSpec::Cartesian { n: a.n, periodic: a.periodic },
        MeshKind::Perturbed => MeshSpec::Perturbed { n: a.n, eps_fraction: a.eps_fraction, seed: None },
        MeshKind::Random => MeshSpec::Random { n: a.points.unwrap_or(a.n * a.n), seed: None },
    };
    let source = match a.source {
        SourceKind::Analytic => SourceSpec::Analytic,
        SourceKind::Momentum => SourceSpec::Momentum {
            dt: a.dt,
            noise_level: a.noise_level,
            noise_seed: None,
            direction_dim: 3,
            aux_n: 100,
        },
    };
    let config = RunConfig {
        case: CaseSpec::TaylorGreen { params: TaylorGreenParams::default(), time: a.time, half_width: a.half_width, source },
        mesh,
        methods: vec![MethodSpec::Gfi {}],
        output: Default::default(),
        seed: seed.unwrap_or(0),
    }
    .resolve()?;
    let prep = pipeline::prepare(&config)?;
    mkdir(&dir)?;
    io::write_vector_csv(&dir.join("source.csv"), &prep.points, &prep.source)?;
    if let Some(t) = &prep.truth {
        io::write_scalar_csv(&dir.join("truth.csv"), &prep.points, t)?;
    }
    let mesh = prep.mesh.as_ref().expect("generated cases carry a mesh");
    io::write_json(&dir.join("mesh.json"), &mesh.to_json())?;
    if let Some(g) = &prep.grid {
        io::write_grid_sidecar(&dir.join("grid.json"), g)?;
    }
    // The method list only exists to pass validation; it is not part of the case.
    let mut recorded = config.clone();
    recorded.methods.clear();
    io::write_json(&dir.join("case.json"), &recorded)?;
    print_json(&serde_json::json!({
        "points": prep.points.len(),
        "cells": mesh.n_cells(),
        "dir": dir,
    }));
    Ok(())
}

fn mesh(a: MeshArgs, out: Option<PathBuf>) -> Result<()> {
    let dir = need_out(out, "mesh")?;
    let mesh = match (&a.points, &a.grid) {
        (Some(p), None) => delaunay_triangulate(&io::read_field_csv(p)?.points)?,
        (None, Some(g)) => cartesian_cell_mesh(&io::read_grid_sidecar(g)?)?,
        _ => return Err(CliError::Usage("give exactly one of --points or --grid".into())),
    };
    mkdir(&dir)?;
    io::write_json(&dir.join("mesh.json"), &mesh.to_json())?;
    let mut summary = serde_json::json!({
        "cells": mesh.n_cells(),
        "vertices": mesh.vertices().len(),
        "boundary_elements": mesh.boundary().len(),
        "boundary_closed": mesh.boundary_is_closed(),
    });
    if mesh.kind() == CellKind::Triangle {
        let h = quality_histogram(&mesh, a.saturation)?;
        let p = dir.join("quality.csv");
        std::fs::write(&p, h.to_csv()).map_err(|e| pressrec::Error::Io { path: p.display().to_string(), source: e })?;
        summary["fraction_above_threshold"] = fraction_above(&mesh, a.threshold)?.into();
        summary["threshold"] = a.threshold.into();
    }
    print_json(&summary);
    Ok(())
}

/// Mesh for cell-based methods plus the source at its cells.
fn load_mesh(a: &ReconArgs, points: &PointSet2, g: &VectorSamples) -> Result<(CellMesh, Option<CartesianGrid2>, VectorSamples)> {
    if let Some(gp) = &a.grid {
        let grid = io::read_grid_sidecar(gp)?;
        if grid.len() != points.len() {
            return Err(pressrec::Error::Shape(format!("grid has {} nodes, source has {} points", grid.len(), points.len())).into());
        }
        return Ok((cartesian_cell_mesh(&grid)?, Some(grid), g.clone()));
    }
    let mesh = match &a.mesh {
        Some(mp) => io::read_json::<MeshJson>(mp)?.into_mesh()?,
        None => delaunay_triangulate(points)?,
    };
    let grid = mesh.grid().cloned();
    let source = if g.len() == mesh.n_cells() {
        g.clone()
    } else if g.len() == mesh.vertices().len() {
        mesh.vertex_to_cell_average(g)?
    } else {
        return Err(pressrec::Error::Shape(format!(
            "{} source samples match neither the {} cells nor the {} vertices",
            g.len(),
            mesh.n_cells(),
            mesh.vertices().len()
        ))
        .into());
    };
    Ok((mesh, grid, source))
}

fn reconstruct(a: ReconArgs, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let out = need_out(out, "reconstruct")?;
    let table = io::read_field_csv(&a.source)?;
    let g = table.vector()?;
    let method = match a.method {
        Method::Osmodi => MethodSpec::Osmodi { tol: a.tol, max_iter: a.max_iter },
        Method::Gfi => MethodSpec::Gfi {},
        Method::Siren => MethodSpec::Siren {
            arch: a.arch.clone(),
            omega0: a.omega0,
            c: a.c,
            omega_hidden: a.omega_hidden,
            epochs: a.epochs,
            lr: a.lr,
            seed: Some(seed.unwrap_or(0)),
        },
    };
    let mut prep = match a.method {
        Method::Siren => {
            let points = match &a.eval_points {
                Some(p) => io::read_field_csv(p)?.points,
                None => table.points.clone(),
            };
            Prepared {
                mesh: None,
                grid: None,
                points,
                source: g.clone(),
                truth: None,
                train_points: table.points.clone(),
                train_source: g,
            }
        }
        _ => {
            let (mesh, grid, source) = load_mesh(&a, &table.points, &g)?;
            Prepared {
                points: mesh.centroid_points(),
                mesh: Some(mesh),
                grid,
                source,
                truth: None,
                train_points: table.points.clone(),
                train_source: g,
            }
        }
    };
    if let Some(tp) = &a.truth {
        let t = io::read_field_csv(tp)?.scalar()?;
        let t = if t.len() == prep.points.len() {
            t
        } else if let (Some(m), true) = (&prep.mesh, prep.mesh.as_ref().is_some_and(|m| m.vertices().len() == t.len())) {
            m.vertex_to_cell_average(&VectorSamples::new(1, t.values)?)?.component(0)
        } else {
            return Err(pressrec::Error::Shape(format!("truth has {} values for {} output points", t.len(), prep.points.len())).into());
        };
        prep.truth = Some(t);
    }
    let report = pipeline::run_method(&prep, &method)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        mkdir(parent)?;
    }
    match &report.model {
        Some(model) => {
            let ev = pressrec::siren::evaluate(model, &prep.points);
            let flags: Vec<f64> = ev.extrapolated.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect();
            io::write_field_csv(&out, &prep.points, &[&report.pressure.values, &flags])?;
            if let Some(cp) = &a.checkpoint {
                io::write_json(cp, model)?;
            }
        }
        None => io::write_scalar_csv(&out, &prep.points, &report.pressure)?,
    }
    let report_path = a.report.clone().unwrap_or_else(|| out.with_extension("report.json"));
    let body = serde_json::json!({
        "toolkit_version": pipeline::VERSION,
        "method": method,
        "seed": seed.unwrap_or(0),
        "source": a.source,
        "report": report,
        "wall_time_s": report.wall_time_s,
    });
    io::write_json(&report_path, &body)?;
    print_json(&report);
    Ok(())
}

fn sweep(a: SweepArgs, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let out = need_out(out, "sweep")?;
    let mut cfg: SweepConfig = io::read_json(&a.config)?;
    if let Some(s) = seed {
        cfg.base.seed = s;
    }
    let result = pipeline::noise_sweep(&cfg)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        mkdir(parent)?;
    }
    let write = |p: &Path, text: String| -> Result<()> {
        std::fs::write(p, text).map_err(|e| pressrec::Error::Io { path: p.display().to_string(), source: e })?;
        Ok(())
    };
    write(&out, result.rows_csv())?;
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    write(&out.with_file_name(format!("{stem}_summary.csv")), result.summary_csv())?;
    io::write_json(&out.with_extension("json"), &serde_json::json!({ "config": cfg, "result": result }))?;
    print_json(&serde_json::json!({ "spearman": result.spearman }));
    Ok(())
}

fn spectrum(a: SpectrumArgs, out: Option<PathBuf>) -> Result<()> {
    let out = need_out(out, "spectrum")?;
    let recon = io::read_field_csv(&a.recon)?;
    let truth = io::read_field_csv(&a.truth)?;
    if recon.points != truth.points {
        return Err(pressrec::Error::Shape("reconstruction and truth are sampled at different points".into()).into());
    }
    let grid = match &a.grid {
        Some(g) => io::read_grid_sidecar(g)?,
        None => lattice::periodic_grid(&truth.points)?,
    };
    let t: ScalarSamples = truth.scalar()?;
    let (aligned, _) = metrics::align_gauge(&recon.scalar()?, &t)?;
    let table = metrics::transfer_function(&grid, &aligned, &t)?;
    std::fs::write(&out, table.to_csv()).map_err(|e| pressrec::Error::Io { path: out.display().to_string(), source: e })?;
    print_json(&serde_json::json!({
        "bins": table.bins.len(),
        "truth_power": table.truth_power.iter().sum::<f64>(),
        "recon_power": table.recon_power.iter().sum::<f64>(),
    }));
    Ok(())
}

fn report(a: ReportArgs, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut cfg: RunConfig = io::read_json(&a.config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output.dir = Some(o);
    }
    if cfg.output.dir.is_none() {
        return Err(CliError::Usage("no output directory: set output.dir or pass --out".into()));
    }
    let result = pipeline::run_pipeline(&cfg)?;
    print_json(&result.summary());
    Ok(())
}
