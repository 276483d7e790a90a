//! Synthetic ground truth: Taylor-Green fields, momentum source terms, the
//! velocity noise model and point seedings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{CartesianGrid2, PointSet2, ScalarSamples, VectorSamples};
use crate::fourier::spectral_derivative;
use crate::geometry::{convex_hull, Bounds};
use crate::rng::CounterRng;

/// Decaying 2D Taylor-Green vortex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorGreenParams {
    /// Velocity scale.
    pub u: f64,
    /// Wavenumber.
    pub k: f64,
    /// Kinematic viscosity.
    pub nu: f64,
    pub rho: f64,
}

impl Default for TaylorGreenParams {
    fn default() -> Self {
        Self { u: 1.0, k: 1.0, nu: 0.01, rho: 1.0 }
    }
}

impl TaylorGreenParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.u > 0.0 && self.k > 0.0 && self.rho > 0.0 && self.nu >= 0.0) {
            return Err(Error::InvalidParameter(format!("invalid Taylor-Green parameters {self:?}")));
        }
        Ok(())
    }

    /// Dynamic viscosity.
    pub fn mu(&self) -> f64 {
        self.rho * self.nu
    }

    fn decay(&self, t: f64) -> f64 {
        (-2.0 * self.nu * self.k * self.k * t).exp()
    }

    pub fn velocity_at(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let f = self.decay(t);
        let (kx, ky) = (self.k * x, self.k * y);
        [-self.u * kx.cos() * ky.sin() * f, self.u * kx.sin() * ky.cos() * f]
    }

    pub fn pressure_at(&self, x: f64, y: f64, t: f64) -> f64 {
        let f = self.decay(t);
        -0.25 * self.rho * self.u * self.u * ((2.0 * self.k * x).cos() + (2.0 * self.k * y).cos()) * f * f
    }

    pub fn pressure_gradient_at(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let f = self.decay(t);
        let a = 0.5 * self.rho * self.u * self.u * self.k * f * f;
        [a * (2.0 * self.k * x).sin(), a * (2.0 * self.k * y).sin()]
    }
}

#[derive(Debug, Clone)]
pub struct TaylorGreenSample {
    pub velocity: VectorSamples,
    pub pressure: ScalarSamples,
    pub pressure_gradient: VectorSamples,
}

pub fn taylor_green_eval(params: &TaylorGreenParams, points: &PointSet2, t: f64) -> TaylorGreenSample {
    let c = points.coords();
    let vel: Vec<[f64; 2]> = c.iter().map(|p| params.velocity_at(p[0], p[1], t)).collect();
    let grad: Vec<[f64; 2]> = c.iter().map(|p| params.pressure_gradient_at(p[0], p[1], t)).collect();
    TaylorGreenSample {
        velocity: VectorSamples::from_pairs(&vel),
        pressure: ScalarSamples::new(c.iter().map(|p| params.pressure_at(p[0], p[1], t)).collect()),
        pressure_gradient: VectorSamples::from_pairs(&grad),
    }
}

/// First derivative along one grid line, second order everywhere.
fn d1(f: &dyn Fn(usize) -> f64, i: usize, n: usize, h: f64, periodic: bool) -> f64 {
    if periodic {
        return (f((i + 1) % n) - f((i + n - 1) % n)) / (2.0 * h);
    }
    if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * h)
    }
}

/// Second derivative along one grid line; second order when four points are
/// available at an edge, first order otherwise.
fn d2(f: &dyn Fn(usize) -> f64, i: usize, n: usize, h: f64, periodic: bool) -> f64 {
    let h2 = h * h;
    if periodic {
        return (f((i + 1) % n) - 2.0 * f(i) + f((i + n - 1) % n)) / h2;
    }
    if i == 0 {
        if n >= 4 {
            (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2
        } else {
            (f(0) - 2.0 * f(1) + f(2)) / h2
        }
    } else if i == n - 1 {
        if n >= 4 {
            (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2
        } else {
            (f(n - 1) - 2.0 * f(n - 2) + f(n - 3)) / h2
        }
    } else {
        (f(i + 1) - 2.0 * f(i) + f(i - 1)) / h2
    }
}

/// Pressure gradient implied by the momentum balance,
/// `-rho (du/dt + (u . grad) u) + mu lap u`, from three velocity snapshots
/// `dt` apart. Only the in-plane components are used.
pub fn momentum_source(
    grid: &CartesianGrid2,
    u_prev: &VectorSamples,
    u_now: &VectorSamples,
    u_next: &VectorSamples,
    dt: f64,
    rho: f64,
    mu: f64,
) -> Result<VectorSamples> {
    grid.validate()?;
    for (name, s) in [("previous", u_prev), ("current", u_now), ("next", u_next)] {
        if s.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{name} snapshot has {} samples, grid has {} nodes",
                s.len(),
                grid.len()
            )));
        }
    }
    if u_prev.dim() != u_now.dim() || u_next.dim() != u_now.dim() {
        return Err(Error::Shape("snapshots have different component counts".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let (nx, ny, h, per) = (grid.nx, grid.ny, grid.h, grid.periodic);
    let mut out = Vec::with_capacity(2 * grid.len());
    for j in 0..ny {
        for i in 0..nx {
            let idx = grid.index(i, j);
            let u = u_now.xy(idx);
            for c in 0..2 {
                let along_x = |k: usize| u_now.get(grid.index(k, j))[c];
                let along_y = |k: usize| u_now.get(grid.index(i, k))[c];
                let dudt = (u_next.get(idx)[c] - u_prev.get(idx)[c]) / (2.0 * dt);
                let dudx = d1(&along_x, i, nx, h, per);
                let dudy = d1(&along_y, j, ny, h, per);
                let lap = d2(&along_x, i, nx, h, per) + d2(&along_y, j, ny, h, per);
                out.push(-rho * (dudt + u[0] * dudx + u[1] * dudy) + mu * lap);
            }
        }
    }
    VectorSamples::new(2, out)
}

/// Velocity noise: amplitude ~ Normal(0, sigma^2) with `sigma = level * v_max / 2`
/// and an isotropic random direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub level: f64,
    pub rng_seed: u64,
    /// 2: direction uniform on the circle. 3: uniform on the sphere, with the
    /// out-of-plane part dropped for two-component fields.
    pub direction_dim: usize,
}

impl NoiseSpec {
    pub fn new(level: f64, rng_seed: u64) -> Self {
        Self { level, rng_seed, direction_dim: 3 }
    }
}

pub fn add_noise(velocity: &VectorSamples, spec: &NoiseSpec) -> Result<VectorSamples> {
    if !(spec.level >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise level must be non-negative, got {}", spec.level)));
    }
    if !(2..=3).contains(&spec.direction_dim) {
        return Err(Error::InvalidParameter("direction_dim must be 2 or 3".into()));
    }
    let v_max = velocity
        .iter()
        .filter(|v| v.iter().all(|x| x.is_finite()))
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or(Error::EmptyField)?;
    let mut out = velocity.clone();
    if spec.level == 0.0 {
        return Ok(out);
    }
    let sigma = 0.5 * spec.level * v_max;
    for i in 0..out.len() {
        if !velocity.is_valid(i) {
            continue;
        }
        let mut rng = CounterRng::new(spec.rng_seed, i as u64);
        let a = sigma * rng.normal();
        let d = if spec.direction_dim == 2 {
            let theta = std::f64::consts::TAU * rng.uniform();
            [theta.cos(), theta.sin(), 0.0]
        } else {
            let z = 2.0 * rng.uniform() - 1.0;
            let phi = std::f64::consts::TAU * rng.uniform();
            let s = (1.0 - z * z).max(0.0).sqrt();
            [s * phi.cos(), s * phi.sin(), z]
        };
        for (c, x) in out.get_mut(i).iter_mut().enumerate() {
            *x += a * d[c];
        }
    }
    Ok(out)
}

/// Seeded points together with flags for points on the domain boundary (or
/// on the convex hull, for random seedings).
#[derive(Debug, Clone)]
pub struct Seeding {
    pub points: PointSet2,
    pub boundary: Vec<bool>,
}

/// Regular `n x n` lattice over `domain` whose interior points get independent
/// Normal(0, eps_std^2) offsets in x and y.
pub fn seed_perturbed_grid(n_per_side: usize, domain: Bounds, eps_std: f64, rng_seed: u64) -> Result<Seeding> {
    if n_per_side < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 points per side, got {n_per_side}")));
    }
    if !(eps_std >= 0.0) {
        return Err(Error::InvalidParameter("perturbation std must be non-negative".into()));
    }
    let n = n_per_side;
    let (dx, dy) = (domain.width() / (n - 1) as f64, domain.height() / (n - 1) as f64);
    let mut coords = Vec::with_capacity(n * n);
    let mut boundary = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let on_edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            let x = if i == n - 1 { domain.max[0] } else { domain.min[0] + dx * i as f64 };
            let y = if j == n - 1 { domain.max[1] } else { domain.min[1] + dy * j as f64 };
            let p = if on_edge || eps_std == 0.0 {
                [x, y]
            } else {
                let mut rng = CounterRng::new(rng_seed, (j * n + i) as u64);
                [x + eps_std * rng.normal(), y + eps_std * rng.normal()]
            };
            coords.push(p);
            boundary.push(on_edge);
        }
    }
    Ok(Seeding { points: PointSet2::new(coords)?, boundary })
}

/// `n` i.i.d. uniform points in the square of side `side` centred on the origin.
pub fn seed_uniform_random(n: usize, side: f64, rng_seed: u64) -> Result<Seeding> {
    seed_uniform_random_in(n, Bounds::centered_square(side), rng_seed)
}

pub fn seed_uniform_random_in(n: usize, domain: Bounds, rng_seed: u64) -> Result<Seeding> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 points, got {n}")));
    }
    let coords: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let mut rng = CounterRng::new(rng_seed, i as u64);
            [rng.uniform_in(domain.min[0], domain.max[0]), rng.uniform_in(domain.min[1], domain.max[1])]
        })
        .collect();
    let mut boundary = vec![false; n];
    for i in convex_hull(&coords) {
        boundary[i] = true;
    }
    Ok(Seeding { points: PointSet2::new(coords)?, boundary })
}

/// Concentric rings filling a disk: `n_boundary` points on the rim and inner
/// rings spaced by roughly the rim spacing. Rim points are flagged.
pub fn seed_disk(n_boundary: usize, radius: f64, center: [f64; 2]) -> Result<Seeding> {
    if n_boundary < 3 || !(radius > 0.0) {
        return Err(Error::InvalidParameter("disk needs at least 3 rim points and a positive radius".into()));
    }
    let spacing = std::f64::consts::TAU * radius / n_boundary as f64;
    let rings = (radius / spacing).round().max(1.0) as usize;
    let mut coords = Vec::new();
    let mut boundary = Vec::new();
    for ring in 0..rings {
        let r = radius * (rings - ring) as f64 / rings as f64;
        let count = if ring == 0 {
            n_boundary
        } else {
            ((std::f64::consts::TAU * r / spacing).round() as usize).max(3)
        };
        // Stagger alternate rings for better-shaped triangles.
        let phase = if ring % 2 == 0 { 0.0 } else { 0.5 };
        for k in 0..count {
            let a = std::f64::consts::TAU * (k as f64 + phase) / count as f64;
            coords.push([center[0] + r * a.cos(), center[1] + r * a.sin()]);
            boundary.push(ring == 0);
        }
    }
    coords.push(center);
    boundary.push(false);
    Ok(Seeding { points: PointSet2::new(coords)?, boundary })
}

/// Gradient of a doubly periodic grid field by spectral differentiation.
pub fn spectral_gradient(grid: &CartesianGrid2, field: &ScalarSamples) -> Result<VectorSamples> {
    if !grid.periodic {
        return Err(Error::Unsupported("spectral gradient needs a periodic grid".into()));
    }
    if grid.nx % 2 != 0 || grid.ny % 2 != 0 {
        return Err(Error::Unsupported("spectral gradient needs even grid sizes".into()));
    }
    if field.len() != grid.len() {
        return Err(Error::Shape("field does not match grid".into()));
    }
    let gx = spectral_derivative(grid, &field.values, 0);
    let gy = spectral_derivative(grid, &field.values, 1);
    let pairs: Vec<[f64; 2]> = gx.into_iter().zip(gy).map(|(a, b)| [a, b]).collect();
    Ok(VectorSamples::from_pairs(&pairs))
}
