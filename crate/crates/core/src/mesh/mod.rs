//! Cell complexes for the mesh-based solvers, plus triangle quality tools.

mod delaunay;
mod quality;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{CartesianGrid2, PointSet2, VectorSamples};

pub use delaunay::triangulate;
pub(crate) use delaunay::orient as triangulate_orient;
pub use quality::{aspect_ratio, fraction_above, quality_histogram, triangle_qualities, QualityHistogram, TriangleQuality};

/// Neighbour id used for faces on the domain boundary.
pub const BOUNDARY: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    Quad,
    Triangle,
    Mixed,
}

/// One face of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    /// Neighbouring cell, or [`BOUNDARY`].
    pub neighbor: usize,
    /// Shared face length.
    pub length: f64,
    /// Centroid-to-centroid vector; for boundary faces, centroid to face midpoint.
    pub delta: [f64; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor == BOUNDARY
    }
}

/// A straight boundary segment, oriented with the domain on its left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryElement {
    pub vertices: [usize; 2],
    pub cell: usize,
    pub midpoint: [f64; 2],
    pub normal: [f64; 2],
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct CellMesh {
    vertices: Vec<[f64; 2]>,
    cells: Vec<Vec<usize>>,
    kind: CellKind,
    centroids: Vec<[f64; 2]>,
    areas: Vec<f64>,
    faces: Vec<Vec<Face>>,
    boundary: Vec<BoundaryElement>,
    /// Ranges into `boundary`, one per loop.
    loops: Vec<std::ops::Range<usize>>,
    closed: bool,
    grid: Option<CartesianGrid2>,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn polygon_area_centroid(poly: &[[f64; 2]]) -> (f64, [f64; 2]) {
    // Shift to the first vertex to limit cancellation.
    let o = poly[0];
    let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for k in 0..poly.len() {
        let p = sub(poly[k], o);
        let q = sub(poly[(k + 1) % poly.len()], o);
        let cross = p[0] * q[1] - q[0] * p[1];
        a2 += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    let area = 0.5 * a2;
    (area, [o[0] + cx / (3.0 * a2), o[1] + cy / (3.0 * a2)])
}

impl CellMesh {
    /// Build a mesh from polygonal cells. Cells are reoriented counter-clockwise.
    pub fn from_polygons(vertices: Vec<[f64; 2]>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::DegenerateInput("mesh has no cells".into()));
        }
        let mut cells = cells;
        let mut centroids = Vec::with_capacity(cells.len());
        let mut areas = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.len() < 3 {
                return Err(Error::DegenerateInput(format!("cell {c} has fewer than 3 vertices")));
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Shape(format!("cell {c} references missing vertex {v}")));
            }
            let poly: Vec<[f64; 2]> = cell.iter().map(|&v| vertices[v]).collect();
            let (mut area, centroid) = polygon_area_centroid(&poly);
            if area < 0.0 {
                cell.reverse();
                area = -area;
            }
            if !(area > 0.0) {
                return Err(Error::DegenerateInput(format!("cell {c} has zero area")));
            }
            centroids.push(centroid);
            areas.push(area);
        }
        let kind = if cells.iter().all(|c| c.len() == 4) {
            CellKind::Quad
        } else if cells.iter().all(|c| c.len() == 3) {
            CellKind::Triangle
        } else {
            CellKind::Mixed
        };

        let mut edge_owner: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            for k in 0..cell.len() {
                let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
                edge_owner.entry((a.min(b), a.max(b))).or_default().push((c, k));
            }
        }
        let mut faces = Vec::with_capacity(cells.len());
        let mut open_edges = Vec::new();
        for (c, cell) in cells.iter().enumerate() {
            let mut fc = Vec::with_capacity(cell.len());
            for k in 0..cell.len() {
                let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
                let owners = &edge_owner[&(a.min(b), a.max(b))];
                let length = norm(sub(vertices[b], vertices[a]));
                if !(length > 0.0) {
                    return Err(Error::DegenerateInput(format!("cell {c} has a zero-length edge")));
                }
                match owners.len() {
                    1 => {
                        let mid = [0.5 * (vertices[a][0] + vertices[b][0]), 0.5 * (vertices[a][1] + vertices[b][1])];
                        fc.push(Face { neighbor: BOUNDARY, length, delta: sub(mid, centroids[c]) });
                        open_edges.push((c, k));
                    }
                    2 => {
                        let other = if owners[0].0 == c { owners[1].0 } else { owners[0].0 };
                        fc.push(Face { neighbor: other, length, delta: sub(centroids[other], centroids[c]) });
                    }
                    n => {
                        return Err(Error::DegenerateInput(format!(
                            "edge ({a}, {b}) is shared by {n} cells"
                        )))
                    }
                }
            }
            faces.push(fc);
        }

        let mut mesh = Self {
            vertices,
            cells,
            kind,
            centroids,
            areas,
            faces,
            boundary: Vec::new(),
            loops: Vec::new(),
            closed: true,
            grid: None,
        };
        mesh.build_boundary(open_edges);
        Ok(mesh)
    }

    fn build_boundary(&mut self, open_edges: Vec<(usize, usize)>) {
        let element = |c: usize, k: usize| -> BoundaryElement {
            let cell = &self.cells[c];
            let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let d = sub(pb, pa);
            let length = norm(d);
            BoundaryElement {
                vertices: [a, b],
                cell: c,
                midpoint: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                // Interior is on the left of a -> b, so the right normal points out.
                normal: [d[1] / length, -d[0] / length],
                length,
            }
        };
        let mut by_start: HashMap<usize, Vec<usize>> = HashMap::new();
        for (e, &(c, k)) in open_edges.iter().enumerate() {
            let cell = &self.cells[c];
            by_start.entry(cell[k]).or_default().push(e);
        }
        let mut used = vec![false; open_edges.len()];
        for start in 0..open_edges.len() {
            if used[start] {
                continue;
            }
            let begin = self.boundary.len();
            let first_vertex = {
                let (c, k) = open_edges[start];
                self.cells[c][k]
            };
            let mut e = start;
            loop {
                used[e] = true;
                let (c, k) = open_edges[e];
                let el = element(c, k);
                let end = el.vertices[1];
                self.boundary.push(el);
                if end == first_vertex {
                    break;
                }
                match by_start.get(&end).and_then(|v| v.iter().copied().find(|&n| !used[n])) {
                    Some(n) => e = n,
                    None => {
                        self.closed = false;
                        break;
                    }
                }
            }
            self.loops.push(begin..self.boundary.len());
        }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn centroids(&self) -> &[[f64; 2]] {
        &self.centroids
    }

    pub fn centroid_points(&self) -> PointSet2 {
        PointSet2::new(self.centroids.clone()).expect("centroids are finite")
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn faces(&self, cell: usize) -> &[Face] {
        &self.faces[cell]
    }

    pub fn boundary(&self) -> &[BoundaryElement] {
        &self.boundary
    }

    pub fn boundary_loops(&self) -> impl Iterator<Item = &[BoundaryElement]> {
        self.loops.iter().map(|r| &self.boundary[r.clone()])
    }

    /// True when every boundary element chains into a closed loop.
    pub fn boundary_is_closed(&self) -> bool {
        self.closed
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Mean of the cell centroids weighted by area.
    pub fn area_centroid(&self) -> [f64; 2] {
        let total = self.total_area();
        let mut c = [0.0; 2];
        for (p, a) in self.centroids.iter().zip(&self.areas) {
            c[0] += p[0] * a / total;
            c[1] += p[1] * a / total;
        }
        c
    }

    /// Average vertex-sampled vectors onto cells. A cell is void if any of
    /// its vertices is.
    pub fn vertex_to_cell_average(&self, vertex_values: &VectorSamples) -> Result<VectorSamples> {
        if vertex_values.len() != self.vertices.len() {
            return Err(Error::Shape(format!(
                "{} vertex samples for {} vertices",
                vertex_values.len(),
                self.vertices.len()
            )));
        }
        let dim = vertex_values.dim();
        let mut out = VectorSamples::zeros(dim, self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            let dst = out.get_mut(c);
            for &v in cell {
                for (d, x) in dst.iter_mut().zip(vertex_values.get(v)) {
                    *d += x;
                }
            }
            let n = cell.len() as f64;
            dst.iter_mut().for_each(|d| *d /= n);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            vertices: self.vertices.clone(),
            cells: self.cells.clone(),
            boundary: self.boundary.iter().map(|b| b.vertices).collect(),
            grid: self.grid,
        }
    }

    /// The grid this mesh was built from, for Cartesian meshes.
    pub fn grid(&self) -> Option<&CartesianGrid2> {
        self.grid.as_ref()
    }
}

/// Square cells centred on the grid nodes; cell `j * nx + i` surrounds node `(i, j)`.
pub fn cartesian_cell_mesh(grid: &CartesianGrid2) -> Result<CellMesh> {
    grid.validate()?;
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let corner = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([
                grid.origin[0] + h * (i as f64 - 0.5),
                grid.origin[1] + h * (j as f64 - 0.5),
            ]);
        }
    }
    let mut cells = Vec::with_capacity(grid.len());
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)]);
        }
    }
    let mut mesh = CellMesh::from_polygons(vertices, cells)?;
    mesh.grid = Some(*grid);
    // Pin the geometry to the grid so centroids are the nodes and every face
    // has length h and offset exactly h along an axis.
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.index(i, j);
            mesh.centroids[c] = grid.node(i, j);
            mesh.areas[c] = h * h;
            for (k, face) in mesh.faces[c].iter_mut().enumerate() {
                face.length = h;
                face.delta = match k {
                    0 => [0.0, -h],
                    1 => [h, 0.0],
                    2 => [0.0, h],
                    _ => [-h, 0.0],
                };
                if face.is_boundary() {
                    face.delta = [0.5 * face.delta[0], 0.5 * face.delta[1]];
                }
            }
        }
    }
    Ok(mesh)
}

/// Delaunay triangulation of the convex hull of `points`.
pub fn delaunay_triangulate(points: &PointSet2) -> Result<CellMesh> {
    let tris = triangulate(points.coords())?;
    let cells = tris.into_iter().map(|t| t.to_vec()).collect();
    CellMesh::from_polygons(points.coords().to_vec(), cells)
}

/// On-disk mesh description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshJson {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
    pub boundary: Vec<[usize; 2]>,
    /// Present when the mesh was built from a Cartesian grid; rebuilding from
    /// it restores the exact grid geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<CartesianGrid2>,
}

impl MeshJson {
    pub fn into_mesh(self) -> Result<CellMesh> {
        match self.grid {
            Some(grid) => cartesian_cell_mesh(&grid),
            None => CellMesh::from_polygons(self.vertices, self.cells),
        }
    }
}
