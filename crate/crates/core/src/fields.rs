//! Point sets, uniform grids and the sample containers aligned with them.
//!
//! Missing data is encoded as NaN in sample values. A sample is valid when all
//! of its components are finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scattered 2D sample locations with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet2 {
    coords: Vec<[f64; 2]>,
    valid: Vec<bool>,
}

impl PointSet2 {
    pub fn new(coords: Vec<[f64; 2]>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !c[0].is_finite() || !c[1].is_finite()) {
            return Err(Error::InvalidParameter(format!("point {i} has non-finite coordinates")));
        }
        let valid = vec![true; coords.len()];
        Ok(Self { coords, valid })
    }

    pub fn with_mask(coords: Vec<[f64; 2]>, valid: Vec<bool>) -> Result<Self> {
        if valid.len() != coords.len() {
            return Err(Error::Shape(format!(
                "mask length {} != point count {}",
                valid.len(),
                coords.len()
            )));
        }
        let mut set = Self::new(coords)?;
        set.valid = valid;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.valid[i]
    }

    /// Mark every point satisfying `predicate` as invalid.
    pub fn mask_where(&self, predicate: impl Fn([f64; 2]) -> bool) -> Self {
        let valid = self
            .coords
            .iter()
            .zip(&self.valid)
            .map(|(&c, &v)| v && !predicate(c))
            .collect();
        Self { coords: self.coords.clone(), valid }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for c in &self.coords {
            for d in 0..2 {
                lo[d] = lo[d].min(c[d]);
                hi[d] = hi[d].max(c[d]);
            }
        }
        (lo, hi)
    }
}

/// Uniform Cartesian grid. Node `(i, j)` sits at `origin + h * (i, j)` and has
/// flat index `j * nx + i` (row-major, y slowest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianGrid2 {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: [f64; 2],
    /// The grid samples one period of a doubly periodic field; the node at
    /// `origin + h * nx` would coincide with node 0.
    #[serde(default)]
    pub periodic: bool,
}

impl CartesianGrid2 {
    pub fn new(nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Self> {
        let grid = Self { nx, ny, h, origin, periodic: false };
        grid.validate()?;
        Ok(grid)
    }

    pub fn periodic(nx: usize, ny: usize, h: f64, origin: [f64; 2]) -> Result<Self> {
        let grid = Self { nx, ny, h, origin, periodic: true };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.ny < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3x3 nodes, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {}", self.h)));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + self.h * i as f64,
            self.origin[1] + self.h * j as f64,
        ]
    }

    /// Physical extent covered by the nodes (or by one period when periodic).
    pub fn extents(&self) -> [f64; 2] {
        if self.periodic {
            [self.h * self.nx as f64, self.h * self.ny as f64]
        } else {
            [self.h * (self.nx - 1) as f64, self.h * (self.ny - 1) as f64]
        }
    }

    pub fn points(&self) -> PointSet2 {
        let mut coords = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                coords.push(self.node(i, j));
            }
        }
        PointSet2 { valid: vec![true; coords.len()], coords }
    }

    /// Sample a scalar function at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> ScalarSamples {
        let mut values = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let [x, y] = self.node(i, j);
                values.push(f(x, y));
            }
        }
        ScalarSamples::new(values)
    }
}

/// One scalar per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarSamples {
    pub values: Vec<f64>,
}

impl ScalarSamples {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.values[i].is_finite()
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }
}

/// `dim` components per point, stored interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSamples {
    dim: usize,
    values: Vec<f64>,
}

/// Pressure-gradient (momentum source) samples.
pub type GradientField = VectorSamples;

impl VectorSamples {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!("vector dimension must be 2 or 3, got {dim}")));
        }
        if values.len() % dim != 0 {
            return Err(Error::Shape(format!("{} values is not a multiple of {dim}", values.len())));
        }
        Ok(Self { dim, values })
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Self {
        Self { dim: 2, values: pairs.iter().flat_map(|p| p.iter().copied()).collect() }
    }

    pub fn zeros(dim: usize, n: usize) -> Self {
        Self { dim, values: vec![0.0; dim * n] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// First two components.
    #[inline]
    pub fn xy(&self, i: usize) -> [f64; 2] {
        let v = self.get(i);
        [v[0], v[1]]
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.get(i).iter().all(|v| v.is_finite())
    }

    pub fn valid_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_valid(i)).count()
    }

    pub fn component(&self, c: usize) -> ScalarSamples {
        ScalarSamples::new((0..self.len()).map(|i| self.get(i)[c]).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }
}

/// Bilinear interpolation of a grid field at arbitrary targets.
pub fn bilinear_resample(
    grid: &CartesianGrid2,
    field: &ScalarSamples,
    targets: &PointSet2,
) -> Result<ScalarSamples> {
    if field.len() != grid.len() {
        return Err(Error::Shape(format!("field has {} values, grid has {} nodes", field.len(), grid.len())));
    }
    let tol = 1e-9;
    let mut out = Vec::with_capacity(targets.len());
    for (index, &[x, y]) in targets.coords().iter().enumerate() {
        let fx = snap((x - grid.origin[0]) / grid.h, tol);
        let fy = snap((y - grid.origin[1]) / grid.h, tol);
        let (mx, my) = ((grid.nx - 1) as f64, (grid.ny - 1) as f64);
        if !(fx >= -tol && fx <= mx + tol && fy >= -tol && fy <= my + tol) {
            return Err(Error::OutOfDomain { index, x, y });
        }
        let (fx, fy) = (fx.clamp(0.0, mx), fy.clamp(0.0, my));
        let i0 = (fx.floor() as usize).min(grid.nx - 2);
        let j0 = (fy.floor() as usize).min(grid.ny - 2);
        let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
        let corners = [
            (i0, j0, (1.0 - tx) * (1.0 - ty)),
            (i0 + 1, j0, tx * (1.0 - ty)),
            (i0, j0 + 1, (1.0 - tx) * ty),
            (i0 + 1, j0 + 1, tx * ty),
        ];
        // Zero-weight corners are skipped so nodes reproduce exactly and a
        // NaN neighbour does not leak into an on-node target.
        let value = corners
            .iter()
            .filter(|c| c.2 != 0.0)
            .map(|&(i, j, w)| w * field.values[grid.index(i, j)])
            .sum();
        out.push(value);
    }
    Ok(ScalarSamples::new(out))
}

#[inline]
fn snap(v: f64, tol: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < tol {
        r
    } else {
        v
    }
}

/// Set every sample whose point satisfies `predicate` to NaN.
pub fn mask_void_region(
    samples: &VectorSamples,
    points: &PointSet2,
    predicate: impl Fn([f64; 2]) -> bool,
) -> Result<VectorSamples> {
    if samples.len() != points.len() {
        return Err(Error::Shape(format!(
            "{} samples for {} points",
            samples.len(),
            points.len()
        )));
    }
    let mut out = samples.clone();
    for (i, &c) in points.coords().iter().enumerate() {
        if predicate(c) {
            out.get_mut(i).fill(f64::NAN);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_grid(n: usize) -> CartesianGrid2 {
        CartesianGrid2::new(n, n, 1.0 / (n - 1) as f64, [0.0, 0.0]).unwrap()
    }

    #[test]
    fn constant_field_is_reproduced() {
        let g = unit_grid(5);
        let f = g.sample(|_, _| 5.0);
        let t = PointSet2::new(vec![[0.3, 0.41], [0.99, 0.01]]).unwrap();
        let r = bilinear_resample(&g, &f, &t).unwrap();
        assert!(r.values.iter().all(|&v| (v - 5.0).abs() < 1e-15));
    }

    #[test]
    fn linear_field_is_exact() {
        let g = unit_grid(6);
        let f = g.sample(|x, _| x);
        let t = PointSet2::new(vec![[0.25, 0.7]]).unwrap();
        let r = bilinear_resample(&g, &f, &t).unwrap();
        assert!((r.values[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cell_center_averages_corners() {
        // 2x2 values {0,1,2,3} embedded as the lower-left cell of a 3x3 grid.
        let g = CartesianGrid2::new(3, 3, 1.0, [0.0, 0.0]).unwrap();
        let mut v = vec![0.0; 9];
        v[g.index(0, 0)] = 0.0;
        v[g.index(1, 0)] = 1.0;
        v[g.index(0, 1)] = 2.0;
        v[g.index(1, 1)] = 3.0;
        let t = PointSet2::new(vec![[0.5, 0.5]]).unwrap();
        let r = bilinear_resample(&g, &ScalarSamples::new(v), &t).unwrap();
        assert_eq!(r.values[0], 1.5);
    }

    #[test]
    fn outside_target_is_reported() {
        let g = unit_grid(4);
        let f = g.sample(|x, y| x + y);
        let t = PointSet2::new(vec![[0.5, 0.5], [1.5, 0.5]]).unwrap();
        match bilinear_resample(&g, &f, &t) {
            Err(Error::OutOfDomain { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected out-of-domain, got {other:?}"),
        }
    }

    #[test]
    fn own_nodes_are_bit_exact() {
        let g = CartesianGrid2::new(7, 5, 0.1, [-0.3, 0.2]).unwrap();
        let f = g.sample(|x, y| (3.0 * x).sin() * y.exp());
        let r = bilinear_resample(&g, &f, &g.points()).unwrap();
        assert_eq!(r.values, f.values);
    }

    #[test]
    fn masking_cases() {
        let g = unit_grid(21);
        let pts = g.points();
        let s = VectorSamples::from_pairs(&vec![[1.0, 2.0]; pts.len()]);
        assert_eq!(mask_void_region(&s, &pts, |_| false).unwrap(), s);
        assert_eq!(mask_void_region(&s, &pts, |_| true).unwrap().valid_count(), 0);

        let (cx, cy, r) = (0.5, 0.5, 0.23);
        let inside = |c: [f64; 2]| (c[0] - cx).powi(2) + (c[1] - cy).powi(2) < r * r;
        let masked = mask_void_region(&s, &pts, inside).unwrap();
        let mut brute = 0;
        for j in 0..21 {
            for i in 0..21 {
                let (x, y) = (i as f64 / 20.0, j as f64 / 20.0);
                if (x - cx).powi(2) + (y - cy).powi(2) < r * r {
                    brute += 1;
                }
            }
        }
        assert_eq!(pts.len() - masked.valid_count(), brute);
    }

    proptest! {
        #[test]
        fn affine_fields_resample_exactly(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64,
                                          x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let g = unit_grid(9);
            let f = g.sample(|px, py| a + b * px + c * py);
            let r = bilinear_resample(&g, &f, &PointSet2::new(vec![[x, y]]).unwrap()).unwrap();
            prop_assert!((r.values[0] - (a + b * x + c * y)).abs() < 1e-12);
        }

        #[test]
        fn masking_is_idempotent(r in 0.0..0.8f64) {
            let g = unit_grid(11);
            let pts = g.points();
            let s = VectorSamples::from_pairs(&vec![[0.5, -1.0]; pts.len()]);
            let pred = |c: [f64; 2]| c[0] * c[0] + c[1] * c[1] < r * r;
            let once = mask_void_region(&s, &pts, pred).unwrap();
            let twice = mask_void_region(&once, &pts, pred).unwrap();
            // NaN != NaN, so compare validity and finite values.
            prop_assert_eq!(once.valid_count(), twice.valid_count());
            for i in 0..once.len() {
                prop_assert_eq!(once.is_valid(i), twice.is_valid(i));
            }
        }
    }
}
