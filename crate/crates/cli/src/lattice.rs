//! Recover a grid from row-major lattice points.

use pressrec::fields::{CartesianGrid2, PointSet2};
use pressrec::Error;

/// Treat row-major lattice points as one period of a periodic grid.
pub fn periodic_grid(points: &PointSet2) -> Result<CartesianGrid2, Error> {
    let c = points.coords();
    let not_lattice = |why: &str| Error::Unsupported(format!("points do not form a row-major square lattice: {why}"));
    if c.len() < 9 {
        return Err(not_lattice("too few points"));
    }
    let origin = c[0];
    let h = c[1][0] - origin[0];
    if !(h > 0.0) {
        return Err(not_lattice("x does not increase along the first row"));
    }
    let tol = 1e-9 * h;
    let nx = c.iter().take_while(|p| (p[1] - origin[1]).abs() <= tol).count();
    if nx < 3 || c.len() % nx != 0 {
        return Err(not_lattice("row length does not divide the point count"));
    }
    let ny = c.len() / nx;
    for (k, p) in c.iter().enumerate() {
        let (i, j) = (k % nx, k / nx);
        if (p[0] - (origin[0] + i as f64 * h)).abs() > tol * (1 + i) as f64
            || (p[1] - (origin[1] + j as f64 * h)).abs() > tol * (1 + j) as f64
        {
            return Err(not_lattice(&format!("point {k} is off the lattice")));
        }
    }
    CartesianGrid2::periodic(nx, ny, h, origin)
}
