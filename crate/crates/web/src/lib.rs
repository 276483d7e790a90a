//! WebAssembly bindings for a single static demo page.
//!
//! Build with `wasm-pack build crates/web --target web --out-dir www/pkg` and
//! serve `crates/web/www/`. Each export wraps a plain Rust function so the
//! logic can be tested natively.

use wasm_bindgen::prelude::*;

use pressrec::fields::CartesianGrid2;
use pressrec::mesh::{delaunay_triangulate, fraction_above, quality_histogram};
use pressrec::metrics;
use pressrec::pipeline::{self, CaseSpec, MeshSpec, MethodSpec, RunConfig, SourceSpec};
use pressrec::synth;

/// Gauge-aligned reconstruction on an `n x n` grid, row-major from the
/// bottom-left node.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct FieldView {
    n: usize,
    pressure: Vec<f64>,
    truth: Vec<f64>,
    relative_mae: f64,
    wall_time_ms: f64,
}

#[wasm_bindgen]
impl FieldView {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }
    #[wasm_bindgen(getter)]
    pub fn pressure(&self) -> Vec<f64> {
        self.pressure.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn relative_mae(&self) -> f64 {
        self.relative_mae
    }
    #[wasm_bindgen(getter)]
    pub fn wall_time_ms(&self) -> f64 {
        self.wall_time_ms
    }
}

fn method_spec(method: &str, epochs: usize) -> pressrec::Result<MethodSpec> {
    match method {
        "osmodi" => Ok(MethodSpec::Osmodi { tol: None, max_iter: None }),
        "gfi" => Ok(MethodSpec::Gfi {}),
        "siren" => match MethodSpec::siren_default() {
            MethodSpec::Siren { arch, omega0, c, omega_hidden, lr, seed, .. } => {
                Ok(MethodSpec::Siren { arch, omega0, c, omega_hidden, epochs, lr, seed })
            }
            _ => unreachable!(),
        },
        other => Err(pressrec::Error::InvalidParameter(format!("unknown method `{other}`"))),
    }
}

fn tg_config(n: usize, periodic: bool, noise_level: f64, seed: u64, method: MethodSpec) -> RunConfig {
    let source = if noise_level > 0.0 {
        SourceSpec::Momentum { dt: 0.05, noise_level, noise_seed: Some(seed), direction_dim: 3, aux_n: 100 }
    } else {
        SourceSpec::Analytic
    };
    let mut cfg = RunConfig::taylor_green(MeshSpec::Cartesian { n, periodic }, vec![method]);
    if let CaseSpec::TaylorGreen { source: s, .. } = &mut cfg.case {
        *s = source;
    }
    cfg.seed = seed;
    cfg
}

pub fn reconstruct_field(n: usize, method: &str, noise_level: f64, seed: u64, epochs: usize) -> pressrec::Result<FieldView> {
    let cfg = tg_config(n, false, noise_level, seed, method_spec(method, epochs)?);
    let out = pipeline::run_pipeline(&cfg)?;
    let r = &out.reports[0];
    Ok(FieldView {
        n,
        pressure: r.pressure.values.clone(),
        truth: out.prepared.truth.map(|t| t.values).unwrap_or_default(),
        relative_mae: r.relative_mae.unwrap_or(f64::NAN),
        wall_time_ms: r.wall_time_s * 1e3,
    })
}

/// Taylor-Green reconstruction on an `n x n` grid over `[-pi, pi]^2`.
/// `method` is `osmodi`, `gfi` or `siren`; noise above zero switches to a
/// momentum-balance source from noisy velocity.
#[wasm_bindgen(js_name = reconstructTaylorGreen)]
pub fn reconstruct_taylor_green(n: usize, method: &str, noise_level: f64, seed: u64, epochs: usize) -> Result<FieldView, JsError> {
    reconstruct_field(n, method, noise_level, seed, epochs).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct QualityView {
    edges: Vec<f64>,
    counts: Vec<u32>,
    fraction_above: f64,
    points: Vec<f64>,
    triangles: Vec<u32>,
}

#[wasm_bindgen]
impl QualityView {
    /// Bin edges, one more than `counts`.
    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn counts(&self) -> Vec<u32> {
        self.counts.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn fraction_above(&self) -> f64 {
        self.fraction_above
    }
    /// Interleaved `x, y`.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }
    /// Vertex index triples.
    #[wasm_bindgen(getter)]
    pub fn triangles(&self) -> Vec<u32> {
        self.triangles.clone()
    }
}

pub fn quality_of_seeding(kind: &str, n: usize, seed: u64, threshold: f64) -> pressrec::Result<QualityView> {
    let domain = pressrec::geometry::Bounds::centered_square(2.0);
    let s = match kind {
        "random" => synth::seed_uniform_random_in(n * n, domain, seed)?,
        "perturbed" => synth::seed_perturbed_grid(n, domain, 0.25 * 2.0 / (n - 1) as f64, seed)?,
        other => return Err(pressrec::Error::InvalidParameter(format!("unknown seeding `{other}`"))),
    };
    let mesh = delaunay_triangulate(&s.points)?;
    let h = quality_histogram(&mesh, 10.0)?;
    Ok(QualityView {
        edges: h.edges.clone(),
        counts: h.counts.iter().map(|&c| c as u32).collect(),
        fraction_above: fraction_above(&mesh, threshold)?,
        points: mesh.vertices().iter().flat_map(|p| [p[0], p[1]]).collect(),
        triangles: mesh.cells().iter().flat_map(|c| c.iter().map(|&v| v as u32)).collect(),
    })
}

/// Delaunay mesh of `random` or `perturbed` points in `[-1, 1]^2` and its
/// triangle-quality histogram.
#[wasm_bindgen(js_name = meshQuality)]
pub fn mesh_quality(kind: &str, n: usize, seed: u64, threshold: f64) -> Result<QualityView, JsError> {
    quality_of_seeding(kind, n, seed, threshold).map_err(|e| JsError::new(&e.to_string()))
}

pub fn transfer_amplitudes(n: usize, method: &str, noise_level: f64, seed: u64, epochs: usize) -> pressrec::Result<Vec<f64>> {
    let cfg = tg_config(n, true, noise_level, seed, method_spec(method, epochs)?);
    let out = pipeline::run_pipeline(&cfg)?;
    let grid: &CartesianGrid2 = out.prepared.grid.as_ref().expect("cartesian case");
    let truth = out.prepared.truth.as_ref().expect("synthetic case");
    let t = metrics::transfer_function(grid, &out.reports[0].pressure, truth)?;
    Ok(t.amplitude_ratio.iter().map(|a| a.unwrap_or(f64::NAN)).collect())
}

/// Amplitude transfer function per radial wavenumber bin (NaN where the
/// truth has no power) on a periodic `n x n` Taylor-Green grid.
#[wasm_bindgen(js_name = transferFunction)]
pub fn transfer_function(n: usize, method: &str, noise_level: f64, seed: u64, epochs: usize) -> Result<Vec<f64>, JsError> {
    transfer_amplitudes(n, method, noise_level, seed, epochs).map_err(|e| JsError::new(&e.to_string()))
}
