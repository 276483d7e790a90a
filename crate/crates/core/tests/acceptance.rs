//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per criterion
//! and exits non-zero if any fails.
//!
//! `cargo test -p pressrec --test acceptance -- 3 7` runs a subset.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use pressrec::fields::{mask_void_region, CartesianGrid2, GradientField, PointSet2, ScalarSamples, VectorSamples};
use pressrec::geometry::Bounds;
use pressrec::gfi::reconstruct_gfi;
use pressrec::mesh::{cartesian_cell_mesh, delaunay_triangulate, CellMesh};
use pressrec::metrics::{align_gauge, relative_mae, transfer_function};
use pressrec::osmodi::{assemble_osmodi, reconstruct_osmodi, CgOptions};
use pressrec::pipeline::{
    default_eps_fraction, default_levels, default_seeds, noise_sweep, run_pipeline, write_artifacts, CaseSpec, MeshSpec,
    MethodSpec, RunConfig, SourceSpec, SweepConfig,
};
use pressrec::rng::CounterRng;
use pressrec::siren::{forward_with_gradient, init_siren, loss_and_param_gradient, GradientDataset, SirenConfig, SirenParams};
use pressrec::synth::{seed_disk, seed_perturbed_grid, seed_uniform_random_in, spectral_gradient};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn three_methods() -> Vec<MethodSpec> {
    vec![MethodSpec::Osmodi { tol: None, max_iter: None }, MethodSpec::Gfi {}, MethodSpec::siren_default()]
}

fn mae_of(out: &pressrec::pipeline::PipelineOutput, method: &str) -> f64 {
    let r = out.reports.iter().find(|r| r.method == method).expect("method ran");
    r.relative_mae.expect("synthetic case has truth")
}

fn c1_taylor_green() -> Outcome {
    let cfg = RunConfig::taylor_green(MeshSpec::Cartesian { n: 100, periodic: false }, three_methods());
    let out = run_pipeline(&cfg).unwrap();
    // (method, MAE limit, wall-time limit in seconds)
    let limits = [("osmodi", 1e-2, 10.0), ("gfi", 1e-2, 900.0), ("siren", 2e-2, 600.0)];
    let mut pass = true;
    let mut detail = Vec::new();
    for (m, lim, tlim) in limits {
        let r = out.reports.iter().find(|r| r.method == m).unwrap();
        let mae = r.relative_mae.unwrap();
        pass &= mae <= lim && r.wall_time_s <= tlim;
        detail.push(format!("{m} mae {mae:.3e} (<= {lim:e}) in {:.1}s", r.wall_time_s));
    }
    let siren = out.reports.iter().find(|r| r.method == "siren").unwrap();
    let h = &siren.loss_history;
    let ratio = h[h.len() - 1] / h[0];
    pass &= ratio < 0.01;
    detail.push(format!("final/initial loss {ratio:.2e} (< 1e-2)"));
    let _ = TG_LOSS.set(h.clone());
    Outcome::new(pass, detail.join("; "))
}

static TG_LOSS: OnceLock<Vec<f64>> = OnceLock::new();

/// Window-10 moving average of the criterion-1 loss history must not rise
/// over the final 80% of epochs.
fn p1_loss_trend() -> Outcome {
    let Some(h) = TG_LOSS.get() else {
        return Outcome::new(false, "not run: needs criterion 1");
    };
    let smooth: Vec<f64> = h.windows(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
    let start = smooth.len() / 5;
    let rises: Vec<(usize, f64)> = smooth[start..]
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0])
        .map(|(i, w)| (start + i, w[1] / w[0] - 1.0))
        .collect();
    let worst = rises.iter().map(|r| r.1).fold(0.0f64, f64::max);
    Outcome::new(
        rises.is_empty(),
        format!(
            "{} rising steps after epoch {start}, first at {:?}, largest relative rise {worst:.2e}",
            rises.len(),
            rises.first().map(|r| r.0)
        ),
    )
}

fn c2_five_point_stencil() -> Outcome {
    let n = 12;
    let grid = CartesianGrid2::new(n, n, 0.3, [-1.0, 0.5]).unwrap();
    let mesh = cartesian_cell_mesh(&grid).unwrap();
    let mut rng = CounterRng::new(2, 0);
    let g: Vec<[f64; 2]> = (0..grid.len()).map(|_| [rng.normal(), rng.normal()]).collect();
    let sys = assemble_osmodi(&mesh, &GradientField::from_pairs(&g)).unwrap();
    let mut worst = 0.0f64;
    let mut rows = 0;
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let c = grid.index(i, j);
            let entries: Vec<(usize, f64)> = sys.row(c).collect();
            let diag = sys.entry(c, c);
            assert!(diag > 0.0, "row {c} has non-positive diagonal");
            // Stencil (4, -1, -1, -1, -1) times s = diag / 4.
            let s = diag / 4.0;
            let nbrs = [grid.index(i + 1, j), grid.index(i - 1, j), grid.index(i, j + 1), grid.index(i, j - 1)];
            assert_eq!(entries.len(), 5, "row {c} has {} entries", entries.len());
            for nb in nbrs {
                worst = worst.max((sys.entry(c, nb) + s).abs() / s);
            }
            // Scaled by the same s, the right-hand side is the face-flux sum of
            // the trapezoid face gradients.
            let gx = |a: usize| g[a][0];
            let gy = |a: usize| g[a][1];
            let flux = (gx(nbrs[0]) - gx(nbrs[1]) + gy(nbrs[2]) - gy(nbrs[3])) * grid.h / 2.0;
            worst = worst.max((sys.rhs[c] + s * flux).abs() / (s * flux.abs().max(1e-300)));
            rows += 1;
        }
    }
    Outcome::new(worst <= 1e-13, format!("{rows} interior rows, worst relative deviation {worst:.1e}"))
}

/// Loss evaluated one point at a time, independent of the batched path.
fn pointwise_loss(p: &SirenParams, pts: &[[f64; 2]], g: &[[f64; 2]]) -> f64 {
    pts.iter()
        .zip(g)
        .map(|(&x, t)| {
            let d = forward_with_gradient(p, x).1;
            (d[0] - t[0]).powi(2) + (d[1] - t[1]).powi(2)
        })
        .sum::<f64>()
        / pts.len() as f64
}

fn c3_gradient_oracles() -> Outcome {
    let t0 = Instant::now();
    let mut rng = CounterRng::new(3, 0);
    let (mut worst_in, mut worst_par) = (0.0f64, 0.0f64);
    for trial in 0..100u64 {
        let cfg = SirenConfig {
            hidden_layers: 1 + (rng.next_u64() % 3) as usize,
            width: 4 + (rng.next_u64() % 21) as usize,
            omega0: rng.uniform_in(1.0, 30.0),
            omega_hidden: 30.0,
            rng_seed: trial,
        };
        let p = init_siren(&cfg).unwrap();
        let pts: Vec<[f64; 2]> = (0..8).map(|_| [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)]).collect();
        let targets: Vec<[f64; 2]> = (0..8).map(|_| [rng.normal(), rng.normal()]).collect();

        let x = pts[0];
        let g = forward_with_gradient(&p, x).1;
        let h = 2e-7;
        let mut fd = [0.0; 2];
        for (d, slot) in fd.iter_mut().enumerate() {
            let phi = |off: f64| {
                let mut y = x;
                y[d] += off;
                forward_with_gradient(&p, y).0
            };
            *slot = (8.0 * (phi(h) - phi(-h)) - (phi(2.0 * h) - phi(-2.0 * h))) / (12.0 * h);
        }
        let gnorm = g[0].abs().max(g[1].abs());
        worst_in = worst_in.max((fd[0] - g[0]).abs().max((fd[1] - g[1]).abs()) / gnorm);

        let data = GradientDataset::new(&PointSet2::new(pts.clone()).unwrap(), &GradientField::from_pairs(&targets)).unwrap();
        let analytic = loss_and_param_gradient(&p, &data).unwrap().1.flatten();
        let flat = p.flatten();
        let mut probe = p.clone();
        let mut shifted = flat.clone();
        let mut err = 0.0f64;
        for i in 0..flat.len() {
            let h = 1e-6 * flat[i].abs().max(1e-2);
            shifted[i] = flat[i] + h;
            probe.assign(&shifted);
            let up = pointwise_loss(&probe, &pts, &targets);
            shifted[i] = flat[i] - h;
            probe.assign(&shifted);
            let down = pointwise_loss(&probe, &pts, &targets);
            shifted[i] = flat[i];
            err = err.max(((up - down) / (2.0 * h) - analytic[i]).abs());
        }
        let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst_par = worst_par.max(err / scale);
    }
    let secs = t0.elapsed().as_secs_f64();
    Outcome::new(
        worst_in < 1e-6 && worst_par < 1e-5 && secs < 60.0,
        format!("100 configs: input rel err {worst_in:.1e} (< 1e-6), parameter rel err {worst_par:.1e} (< 1e-5), {secs:.1}s"),
    )
}

fn affine_error(mesh: &CellMesh) -> f64 {
    let (a, b, c) = (1.5, -0.7, 2.3);
    let cents = mesh.centroids();
    let source = GradientField::from_pairs(&vec![[b, c]; cents.len()]);
    let truth = ScalarSamples::new(cents.iter().map(|p| a + b * p[0] + c * p[1]).collect());
    let opts = CgOptions { tol: 1e-15, max_iter: 50 * cents.len(), jacobi: false };
    let sol = reconstruct_osmodi(mesh, &source, &opts).unwrap();
    let (aligned, _) = align_gauge(&sol.pressure, &truth).unwrap();
    let scale = truth.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    aligned.values.iter().zip(&truth.values).fold(0.0f64, |m, (r, t)| m.max((r - t).abs())) / scale
}

fn c4_affine_exactness() -> Outcome {
    let n = 20;
    let domain = Bounds::centered_square(2.0);
    let h = 2.0 / (n - 1) as f64;
    let cart = cartesian_cell_mesh(&CartesianGrid2::new(n, n, h, [-1.0, -1.0]).unwrap()).unwrap();
    let pert = delaunay_triangulate(&seed_perturbed_grid(n, domain, 0.25 * h, 4).unwrap().points).unwrap();
    let rand = delaunay_triangulate(&seed_uniform_random_in(n * n, domain, 4).unwrap().points).unwrap();
    let errs = [("cartesian", affine_error(&cart)), ("perturbed", affine_error(&pert)), ("random", affine_error(&rand))];
    let pass = errs.iter().all(|e| e.1 <= 1e-10);
    let detail = errs.iter().map(|(m, e)| format!("{m} {e:.1e}")).collect::<Vec<_>>().join(", ");
    Outcome::new(pass, format!("max relative error {detail} (<= 1e-10)"))
}

fn c5_noise_trend() -> Outcome {
    let levels = default_levels();
    assert_eq!(levels, vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.10]);
    assert_eq!(default_seeds().len(), 3);
    let base = RunConfig::taylor_green(MeshSpec::Cartesian { n: 20, periodic: false }, three_methods());
    let res = noise_sweep(&SweepConfig { base, levels, seeds: default_seeds(), dt: 0.05 }).unwrap();
    let pass = res.spearman.iter().all(|(_, r)| r.is_some_and(|r| r >= 0.9));
    let detail = res
        .spearman
        .iter()
        .map(|(m, r)| format!("{m} {}", r.map_or("undefined".into(), |r| format!("{r:.3}"))))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(pass, format!("Spearman {detail} (>= 0.9)"))
}

fn c6_mesh_robustness() -> Outcome {
    let pert = RunConfig::taylor_green(
        MeshSpec::Perturbed { n: 45, eps_fraction: default_eps_fraction(), seed: None },
        three_methods(),
    );
    let rand = RunConfig::taylor_green(MeshSpec::Random { n: 45 * 45, seed: None }, three_methods());
    let (a, b) = (run_pipeline(&pert).unwrap(), run_pipeline(&rand).unwrap());
    let inflation = |m: &str| mae_of(&b, m) / mae_of(&a, m);
    let (fo, fg, fs) = (inflation("osmodi"), inflation("gfi"), inflation("siren"));
    Outcome::new(
        fs < fo && fs < fg,
        format!("MAE inflation perturbed -> random: siren {fs:.2}x, osmodi {fo:.2}x, gfi {fg:.2}x"),
    )
}

fn c7_spectral_fidelity() -> Outcome {
    let n = 64;
    let grid = CartesianGrid2::periodic(n, n, 2.0 * PI / n as f64, [0.0, 0.0]).unwrap();
    let mut rng = CounterRng::new(7, 0);
    let modes: Vec<(f64, f64, f64)> = (1..=8).map(|k| (k as f64, rng.uniform_in(0.0, 2.0 * PI), rng.uniform_in(0.0, 2.0 * PI))).collect();
    let truth = grid.sample(|x, y| modes.iter().map(|&(k, a, b)| ((k * x + a).cos() + (k * y + b).sin()) / k).sum());
    let source = spectral_gradient(&grid, &truth).unwrap();
    let mesh = cartesian_cell_mesh(&grid).unwrap();
    let sol = reconstruct_osmodi(&mesh, &source, &CgOptions::for_size(grid.len())).unwrap();
    let (aligned, _) = align_gauge(&sol.pressure, &truth).unwrap();
    let tf = transfer_function(&grid, &aligned, &truth).unwrap();
    let amps: Vec<f64> = (1..=8).map(|k| tf.amplitude_ratio[k].expect("mode present")).collect();
    let in_band = amps.iter().all(|a| (0.9..=1.1).contains(a));
    let ident = transfer_function(&grid, &truth, &truth).unwrap();
    let exact = ident.ratio.iter().flatten().all(|&r| r == 1.0) && ident.amplitude_ratio.iter().flatten().all(|&r| r == 1.0);
    let lo = amps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = amps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Outcome::new(
        in_band && exact,
        format!("amplitude ratio k=1..8 in [{lo:.4}, {hi:.4}] (within [0.9, 1.1]); truth/truth identically 1: {exact}"),
    )
}

/// Minimum-norm dense solve of the row-scaled system over the data cells.
fn dense_oracle(mesh: &CellMesh, source: &GradientField) -> Vec<f64> {
    let sys = assemble_osmodi(mesh, source).unwrap();
    let data: Vec<usize> = (0..sys.n).filter(|&c| !sys.void[c]).collect();
    let pos = |c: usize| data.iter().position(|&d| d == c);
    let m = data.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (r, &c) in data.iter().enumerate() {
        for (col, v) in sys.row(c) {
            if let Some(k) = pos(col) {
                a[(r, k)] = v * sys.row_scale[c];
            }
        }
        b[r] = sys.rhs[c] * sys.row_scale[c];
    }
    let x = a.svd(true, true).solve(&b, 1e-10).unwrap();
    let mean = x.mean();
    let mut out = vec![f64::NAN; sys.n];
    for (r, &c) in data.iter().enumerate() {
        out[c] = x[r] - mean;
    }
    out
}

/// Non-separable field on `[-pi, pi]^2`. Separable fields such as the
/// Taylor-Green pressure give trapezoid increments that are exactly
/// consistent on every grid loop, so a void would not change anything.
fn wavy_grid_case(n: usize) -> (CartesianGrid2, CellMesh, GradientField, ScalarSamples) {
    let h = 2.0 * PI / (n - 1) as f64;
    let grid = CartesianGrid2::new(n, n, h, [-PI, -PI]).unwrap();
    let truth = grid.sample(|x, y| x.sin() * y.cos() + 0.3 * (2.0 * x + y).sin());
    let g: Vec<[f64; 2]> = grid
        .points()
        .coords()
        .iter()
        .map(|&[x, y]| [x.cos() * y.cos() + 0.6 * (2.0 * x + y).cos(), -x.sin() * y.sin() + 0.3 * (2.0 * x + y).cos()])
        .collect();
    let mesh = cartesian_cell_mesh(&grid).unwrap();
    (grid, mesh, GradientField::from_pairs(&g), truth)
}

fn masked(source: &VectorSamples, grid: &CartesianGrid2, r: f64) -> VectorSamples {
    mask_void_region(source, &grid.points(), |p| p[0].hypot(p[1]) < r).unwrap()
}

fn c8_void_handling() -> Outcome {
    // Solver against the dense minimum-norm solution on a small masked grid.
    let (grid, mesh, source, _) = wavy_grid_case(14);
    let src = masked(&source, &grid, 1.2);
    let oracle = dense_oracle(&mesh, &src);
    let sol = reconstruct_osmodi(&mesh, &src, &CgOptions { tol: 1e-13, ..CgOptions::for_size(grid.len()) }).unwrap();
    let scale = oracle.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs()));
    let oracle_err = sol
        .pressure
        .values
        .iter()
        .zip(&oracle)
        .filter(|(_, o)| o.is_finite())
        .fold(0.0f64, |m, (p, o)| m.max((p - o).abs()))
        / scale;

    let n = 60;
    let radius = 1.0;
    let (grid, mesh, source, truth) = wavy_grid_case(n);
    let opts = CgOptions::for_size(grid.len());
    let full = reconstruct_osmodi(&mesh, &source, &opts).unwrap();
    let src = masked(&source, &grid, radius);
    let void = reconstruct_osmodi(&mesh, &src, &opts).unwrap();
    let all_finite = (0..grid.len()).filter(|&c| src.is_valid(c)).all(|c| void.pressure.values[c].is_finite());

    let keep: Vec<usize> = grid.points().coords().iter().enumerate().filter(|(_, p)| p[0].hypot(p[1]) >= radius + 2.0 * grid.h).map(|(i, _)| i).collect();
    let subset = |s: &ScalarSamples| ScalarSamples::new(keep.iter().map(|&i| s.values[i]).collect());
    let t = subset(&truth);
    let mae = |p: &ScalarSamples| {
        let (a, _) = align_gauge(&subset(p), &t).unwrap();
        relative_mae(&a, &t).unwrap()
    };
    let (m_full, m_void) = (mae(&full.pressure), mae(&void.pressure));
    let change = (m_void - m_full).abs() / m_full;
    Outcome::new(
        all_finite && change <= 0.05 && oracle_err <= 1e-8,
        format!(
            "dense-oracle deviation {oracle_err:.1e}; all valid cells finite: {all_finite}; MAE outside buffer {m_void:.3e} vs unmasked {m_full:.3e} ({:.2}% change)",
            100.0 * change
        ),
    )
}

fn c9_gfi_harmonic() -> Outcome {
    let seeding = seed_disk(256, 1.0, [0.0, 0.0]).unwrap();
    let mesh = delaunay_triangulate(&seeding.points).unwrap();
    assert_eq!(mesh.boundary().len(), 256);
    let p = |x: [f64; 2]| x[0] * x[0] - x[1] * x[1];
    let source = GradientField::from_pairs(&mesh.centroids().iter().map(|c| [2.0 * c[0], -2.0 * c[1]]).collect::<Vec<_>>());
    let sol = reconstruct_gfi(&mesh, &source).unwrap();
    let truth_in = ScalarSamples::new(mesh.centroids().iter().map(|&c| p(c)).collect());
    let truth_b = ScalarSamples::new(mesh.boundary().iter().map(|e| p(e.midpoint)).collect());
    let err = |r: &ScalarSamples, t: &ScalarSamples| relative_mae(&align_gauge(r, t).unwrap().0, t).unwrap();
    let eb = err(&ScalarSamples::new(sol.boundary.pressures.clone()), &truth_b);
    let ei = err(&sol.pressure, &truth_in);
    Outcome::new(eb <= 0.02 && ei <= 0.02, format!("relative MAE boundary {eb:.2e}, interior {ei:.2e} (<= 2e-2)"))
}

fn c10_determinism() -> Outcome {
    let methods = vec![
        MethodSpec::Osmodi { tol: None, max_iter: None },
        MethodSpec::Gfi {},
        MethodSpec::Siren { arch: "2x16".into(), omega0: None, c: 2.0, omega_hidden: 30.0, epochs: 150, lr: 1e-4, seed: None },
    ];
    let mut noisy = RunConfig::taylor_green(MeshSpec::Cartesian { n: 24, periodic: false }, methods.clone());
    if let CaseSpec::TaylorGreen { source, .. } = &mut noisy.case {
        *source = SourceSpec::Momentum { dt: 0.05, noise_level: 0.05, noise_seed: None, direction_dim: 3, aux_n: 60 };
    }
    noisy.seed = 11;
    let mut random = RunConfig::taylor_green(MeshSpec::Random { n: 500, seed: None }, methods);
    random.seed = 12;
    let mut mismatches = Vec::new();
    for (label, cfg) in [("cartesian+noise", &noisy), ("random mesh", &random)] {
        let (a, b) = (run_pipeline(cfg).unwrap(), run_pipeline(cfg).unwrap());
        for (ra, rb) in a.reports.iter().zip(&b.reports) {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            if bits(&ra.pressure.values) != bits(&rb.pressure.values) || bits(&ra.loss_history) != bits(&rb.loss_history) {
                mismatches.push(format!("{label}/{}", ra.method));
            }
        }
        let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        write_artifacts(&a, da.path()).unwrap();
        write_artifacts(&b, db.path()).unwrap();
        let files = |d: &std::path::Path| {
            let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(d)
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.file_name().unwrap() != "timings.json")
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect();
            v.sort();
            v
        };
        let (fa, fb) = (files(da.path()), files(db.path()));
        if fa.is_empty() || fa != fb {
            mismatches.push(format!("{label}/artifacts"));
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        if mismatches.is_empty() { "two runs bit-identical (fields, loss histories, artifacts)".to_string() } else { format!("differs: {}", mismatches.join(", ")) },
    )
}

fn run(id: &str, name: &str, check: fn() -> Outcome) -> bool {
    let t0 = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Outcome::new(false, format!("panicked: {}", msg.unwrap_or_default()))
    });
    println!(
        "{id} ({name}): {} [{:.1}s] {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64(),
        outcome.detail
    );
    outcome.pass
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "Taylor-Green accuracy and runtime", c1_taylor_green),
        (2, "uniform-grid five-point stencil", c2_five_point_stencil),
        (3, "network gradient oracles", c3_gradient_oracles),
        (4, "affine exactness", c4_affine_exactness),
        (5, "noise trend", c5_noise_trend),
        (6, "mesh-robustness ordering", c6_mesh_robustness),
        (7, "spectral fidelity", c7_spectral_fidelity),
        (8, "void handling", c8_void_handling),
        (9, "boundary-integral harmonic check", c9_gfi_harmonic),
        (10, "determinism", c10_determinism),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (mut ran, mut failed) = (0, 0);
    for (id, name, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        ran += 1;
        failed += usize::from(!run(&format!("criterion {id}"), name, check));
    }
    // Training-trend property, reported but not one of the criteria.
    let prop_failed = if TG_LOSS.get().is_some() {
        usize::from(!run("property", "smoothed network loss non-increasing", p1_loss_trend))
    } else {
        0
    };
    println!("acceptance: {} of {ran} criteria passed; property checks failed: {prop_failed}", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
