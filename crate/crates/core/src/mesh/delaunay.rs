//! Incremental Bowyer-Watson triangulation.
//!
//! The hull is handled with ghost triangles: every hull edge `a -> b` (outside
//! on the left) carries a triangle `(a, b, GHOST)` whose "circumcircle" is the
//! open outer half-plane plus the open edge itself. This removes the usual
//! super-triangle artefacts along the hull. Orientation and in-circle tests use
//! adaptive exact predicates, and points are inserted in index order, so ties
//! between cocircular points resolve in favour of lower indices.

use std::collections::HashSet;

use robust::{incircle, orient2d, Coord};

use crate::error::{Error, Result};

const GHOST: usize = usize::MAX;

#[inline]
fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

#[inline]
pub(crate) fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    orient2d(coord(a), coord(b), coord(c))
}

/// Is `p` strictly inside the circumcircle of the counter-clockwise triangle `abc`?
#[inline]
pub(crate) fn in_circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> bool {
    incircle(coord(a), coord(b), coord(c), coord(p)) > 0.0
}

fn conflicts(tri: &[usize; 3], pts: &[[f64; 2]], p: [f64; 2]) -> bool {
    if tri[2] == GHOST {
        let (a, b) = (pts[tri[0]], pts[tri[1]]);
        let o = orient(a, b, p);
        if o > 0.0 {
            return true;
        }
        if o < 0.0 {
            return false;
        }
        // Collinear: conflict only when strictly inside the segment.
        let t = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]);
        let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        t > 0.0 && t < len2
    } else {
        in_circumcircle(pts[tri[0]], pts[tri[1]], pts[tri[2]], p)
    }
}

/// Triangulate the convex hull of `pts`. Returns counter-clockwise vertex
/// triples, sorted for a canonical order.
pub fn triangulate(pts: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    if pts.len() < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 points, got {}", pts.len())));
    }
    if let Some(i) = pts.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidParameter(format!("point {i} is not finite")));
    }
    check_duplicates(pts)?;

    let third = (2..pts.len())
        .find(|&k| orient(pts[0], pts[1], pts[k]) != 0.0)
        .ok_or_else(|| Error::DegenerateInput("all points are collinear".into()))?;
    let (a, b, c) = if orient(pts[0], pts[1], pts[third]) > 0.0 {
        (0, 1, third)
    } else {
        (1, 0, third)
    };
    let mut tris: Vec<[usize; 3]> = vec![[a, b, c], [b, a, GHOST], [c, b, GHOST], [a, c, GHOST]];

    let mut cavity_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut bad: Vec<usize> = Vec::new();
    for i in (0..pts.len()).filter(|&i| i != 0 && i != 1 && i != third) {
        let p = pts[i];
        bad.clear();
        bad.extend((0..tris.len()).filter(|&t| conflicts(&tris[t], pts, p)));
        if bad.is_empty() {
            return Err(Error::DegenerateInput(format!("point {i} could not be inserted")));
        }

        cavity_edges.clear();
        for &t in &bad {
            let v = tris[t];
            for k in 0..3 {
                cavity_edges.insert((v[k], v[(k + 1) % 3]));
            }
        }
        let mut fresh = Vec::with_capacity(bad.len() + 2);
        for &t in &bad {
            let v = tris[t];
            for k in 0..3 {
                let (u, w) = (v[k], v[(k + 1) % 3]);
                if cavity_edges.contains(&(w, u)) {
                    continue;
                }
                let tri = if u == GHOST {
                    [w, i, GHOST]
                } else if w == GHOST {
                    [i, u, GHOST]
                } else {
                    if orient(pts[u], pts[w], p) <= 0.0 {
                        return Err(Error::DegenerateInput(format!(
                            "point {i} produced a degenerate triangle"
                        )));
                    }
                    [u, w, i]
                };
                fresh.push(tri);
            }
        }
        // Remove in descending order so swap_remove keeps indices valid.
        for &t in bad.iter().rev() {
            tris.swap_remove(t);
        }
        tris.extend(fresh);
    }

    let mut out: Vec<[usize; 3]> = tris
        .into_iter()
        .filter(|t| t[2] != GHOST)
        .map(canonical_rotation)
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Rotate so the smallest index comes first, preserving orientation.
fn canonical_rotation(t: [usize; 3]) -> [usize; 3] {
    let k = (0..3).min_by_key(|&k| t[k]).unwrap();
    [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
}

fn check_duplicates(pts: &[[f64; 2]]) -> Result<()> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| {
        pts[i][0]
            .total_cmp(&pts[j][0])
            .then(pts[i][1].total_cmp(&pts[j][1]))
            .then(i.cmp(&j))
    });
    for w in order.windows(2) {
        if pts[w[0]] == pts[w[1]] {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::DuplicatePoint { first, second });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn area(pts: &[[f64; 2]], t: &[usize; 3]) -> f64 {
        0.5 * orient(pts[t[0]], pts[t[1]], pts[t[2]])
    }

    #[test]
    fn square_gives_two_triangles() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let tris = triangulate(&pts).unwrap();
        assert_eq!(tris.len(), 2);
        let total: f64 = tris.iter().map(|t| area(&pts, t)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_points_one_triangle() {
        let pts = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        let tris = triangulate(&pts).unwrap();
        assert_eq!(tris.len(), 1);
        assert!(area(&pts, &tris[0]) > 0.0);
    }

    #[test]
    fn empty_circumcircle_brute_force() {
        let mut rng = CounterRng::new(2024, 0);
        let pts: Vec<[f64; 2]> = (0..50).map(|_| [rng.uniform(), rng.uniform()]).collect();
        let tris = triangulate(&pts).unwrap();
        for t in &tris {
            assert!(area(&pts, t) > 0.0);
            for (k, &p) in pts.iter().enumerate() {
                if t.contains(&k) {
                    continue;
                }
                assert!(!in_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], p), "point {k} inside {t:?}");
            }
        }
        // Euler: T = 2n - 2 - h for n points with h on the hull.
        let hull = hull_size(&pts);
        assert_eq!(tris.len(), 2 * pts.len() - 2 - hull);
    }

    fn hull_size(pts: &[[f64; 2]]) -> usize {
        // Gift wrapping; the random points are in general position.
        let start = (0..pts.len()).min_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0])).unwrap();
        let mut count = 0;
        let mut cur = start;
        loop {
            count += 1;
            let mut next = (cur + 1) % pts.len();
            for k in 0..pts.len() {
                if orient(pts[cur], pts[next], pts[k]) < 0.0 {
                    next = k;
                }
            }
            cur = next;
            if cur == start {
                return count;
            }
        }
    }

    #[test]
    fn collinear_and_duplicate_inputs_fail() {
        let line = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        assert!(matches!(triangulate(&line), Err(Error::DegenerateInput(_))));
        let dup = [[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [1.0, 0.0]];
        match triangulate(&dup) {
            Err(Error::DuplicatePoint { first, second }) => assert_eq!((first, second), (1, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_lattice_with_collinear_hull() {
        let n = 6;
        let pts: Vec<[f64; 2]> = (0..n * n).map(|k| [(k % n) as f64, (k / n) as f64]).collect();
        let tris = triangulate(&pts).unwrap();
        assert_eq!(tris.len(), 2 * (n - 1) * (n - 1));
        let total: f64 = tris.iter().map(|t| area(&pts, t)).sum();
        assert_eq!(total, ((n - 1) * (n - 1)) as f64);
        // Deterministic.
        assert_eq!(tris, triangulate(&pts).unwrap());
    }
}
