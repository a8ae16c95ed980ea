//! Level-set extraction: marching squares in 2D; in 3D each cube face is
//! contoured with the same rule and the face segments are chained into
//! loops, which are fan-triangulated. Every vertex lies on a grid edge.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::field::grid::{dist, norm};
use crate::field::{Point, ScalarField};
use crate::par;

/// Vertex on the grid edge between two nodes.
pub(crate) type EdgeKey = (usize, usize);

/// Polyline segments (2D) or triangles (3D) approximating `{u = level}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetCurve {
    pub dim: usize,
    pub level: f64,
    /// Segment endpoints in 2D.
    pub segments: Vec<[Point; 2]>,
    /// Triangle corners in 3D.
    pub facets: Vec<[Point; 3]>,
}

fn tri_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * norm(&w)
}

impl LevelSetCurve {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty() && self.facets.is_empty()
    }

    /// Total length (2D) or area (3D).
    pub fn measure(&self) -> f64 {
        let l: f64 = self.segments.iter().map(|s| dist(&s[0], &s[1])).sum();
        let a: f64 = self.facets.iter().map(|t| tri_area(&t[0], &t[1], &t[2])).sum();
        l + a
    }

    /// All element vertices (with repetition).
    pub fn vertices(&self) -> impl Iterator<Item = &Point> {
        self.segments
            .iter()
            .flat_map(|s| s.iter())
            .chain(self.facets.iter().flat_map(|t| t.iter()))
    }

    /// CSV rows `element,x,y[,z]`, one per element vertex.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let dim = self.dim;
        out.push_str(if dim == 2 { "element,x,y\n" } else { "element,x,y,z\n" });
        let mut emit = |k: usize, p: &Point| {
            let _ = write!(out, "{k}");
            for c in p.iter().take(dim) {
                let _ = write!(out, ",{c:.11e}");
            }
            out.push('\n');
        };
        for (k, s) in self.segments.iter().enumerate() {
            s.iter().for_each(|p| emit(k, p));
        }
        for (k, t) in self.facets.iter().enumerate() {
            t.iter().for_each(|p| emit(k, p));
        }
        out
    }
}

struct Contour<'a> {
    u: &'a ScalarField,
    level: f64,
}

impl Contour<'_> {
    fn above(&self, i: usize) -> bool {
        self.u.get(i) > self.level
    }

    fn vertex(&self, key: EdgeKey) -> Point {
        let (a, b) = key;
        let (va, vb) = (self.u.get(a), self.u.get(b));
        let t = ((self.level - va) / (vb - va)).clamp(0.0, 1.0);
        let g = self.u.grid();
        let (pa, pb) = (g.coord(a), g.coord(b));
        [
            pa[0] + t * (pb[0] - pa[0]),
            pa[1] + t * (pb[1] - pa[1]),
            pa[2] + t * (pb[2] - pa[2]),
        ]
    }

    /// Marching-squares segments of the quad `c` (corner order: 0-1 along
    /// the first face axis, 0-2 along the second). Saddles are resolved by
    /// the sign of the face average.
    fn square(&self, c: [usize; 4], out: &mut Vec<[EdgeKey; 2]>) {
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let edges = [key(c[0], c[1]), key(c[1], c[3]), key(c[2], c[3]), key(c[0], c[2])];
        let st = [self.above(c[0]), self.above(c[1]), self.above(c[2]), self.above(c[3])];
        let crossing = [st[0] != st[1], st[1] != st[3], st[2] != st[3], st[0] != st[2]];
        let n = crossing.iter().filter(|x| **x).count();
        if n == 2 {
            let e: Vec<EdgeKey> = (0..4).filter(|&k| crossing[k]).map(|k| edges[k]).collect();
            out.push([e[0], e[1]]);
        } else if n == 4 {
            let mean = c.iter().map(|&i| self.u.get(i)).sum::<f64>() / 4.0;
            let center_above = mean > self.level;
            // isolate the corners whose state differs from the center
            let corner_edges = [[0, 3], [0, 1], [2, 3], [1, 2]];
            for k in 0..4 {
                if st[k] != center_above {
                    let [e0, e1] = corner_edges[k];
                    out.push([edges[e0], edges[e1]]);
                }
            }
        }
    }
}

fn nondegenerate(a: &Point, b: &Point, h: f64) -> bool {
    dist(a, b) > 1e-12 * h
}

/// Level set as elements whose vertices are identified by grid edges.
pub(crate) struct KeyedLevelSet {
    pub segments: Vec<[EdgeKey; 2]>,
    pub facets: Vec<[EdgeKey; 3]>,
}

pub(crate) fn edge_vertex(u: &ScalarField, level: f64, key: EdgeKey) -> Point {
    Contour { u, level }.vertex(key)
}

pub(crate) fn extract_keyed(u: &ScalarField, level: f64) -> KeyedLevelSet {
    let g = *u.grid();
    let h = g.h();
    let ct = Contour { u, level };
    let s = g.strides();
    let cells: Vec<usize> = (0..g.cell_count()).map(|c| g.cell_lo(c)).collect();
    if g.dim() == 2 {
        let per_cell = par::map_slice(&cells, |&lo| {
            let mut segs = Vec::new();
            ct.square([lo, lo + s[0], lo + s[1], lo + s[0] + s[1]], &mut segs);
            segs.retain(|[a, b]| nondegenerate(&ct.vertex(*a), &ct.vertex(*b), h));
            segs
        });
        return KeyedLevelSet {
            segments: per_cell.into_iter().flatten().collect(),
            facets: Vec::new(),
        };
    }
    let per_cell = par::map_slice(&cells, |&lo| {
        let corner = |m: usize| lo + (m & 1) * s[0] + (m >> 1 & 1) * s[1] + (m >> 2 & 1) * s[2];
        let st: Vec<bool> = (0..8).map(|m| ct.above(corner(m))).collect();
        if st.iter().all(|x| *x) || st.iter().all(|x| !*x) {
            return Vec::new();
        }
        // six faces, each as a quad with its own 2D corner order
        let faces: [[usize; 4]; 6] = [
            [0, 2, 4, 6],
            [1, 3, 5, 7],
            [0, 1, 4, 5],
            [2, 3, 6, 7],
            [0, 1, 2, 3],
            [4, 5, 6, 7],
        ];
        let mut segs = Vec::new();
        for f in faces {
            ct.square([corner(f[0]), corner(f[1]), corner(f[2]), corner(f[3])], &mut segs);
        }
        // chain segments into closed loops via shared edge keys
        let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
        for (k, sg) in segs.iter().enumerate() {
            adj.entry(sg[0]).or_default().push(k);
            adj.entry(sg[1]).or_default().push(k);
        }
        let mut used = vec![false; segs.len()];
        let mut tris = Vec::new();
        for start in 0..segs.len() {
            if used[start] {
                continue;
            }
            used[start] = true;
            let mut lp = vec![segs[start][0], segs[start][1]];
            loop {
                let tail = *lp.last().unwrap();
                let next = adj[&tail].iter().copied().find(|&k| !used[k]);
                let Some(k) = next else { break };
                used[k] = true;
                let other = if segs[k][0] == tail { segs[k][1] } else { segs[k][0] };
                if other == lp[0] {
                    break;
                }
                lp.push(other);
            }
            let pts: Vec<Point> = lp.iter().map(|&e| ct.vertex(e)).collect();
            for i in 1..pts.len().saturating_sub(1) {
                if tri_area(&pts[0], &pts[i], &pts[i + 1]) > 1e-12 * h * h {
                    tris.push([lp[0], lp[i], lp[i + 1]]);
                }
            }
        }
        tris
    });
    KeyedLevelSet {
        segments: Vec::new(),
        facets: per_cell.into_iter().flatten().collect(),
    }
}

/// Extracts `{u = level}` by linear interpolation along grid edges. A node
/// equal to the level counts as not above it.
pub fn extract_level_set(u: &ScalarField, level: f64) -> LevelSetCurve {
    let keyed = extract_keyed(u, level);
    let ct = Contour { u, level };
    LevelSetCurve {
        dim: u.grid().dim(),
        level,
        segments: keyed
            .segments
            .iter()
            .map(|[a, b]| [ct.vertex(*a), ct.vertex(*b)])
            .collect(),
        facets: keyed
            .facets
            .iter()
            .map(|[a, b, c]| [ct.vertex(*a), ct.vertex(*b), ct.vertex(*c)])
            .collect(),
    }
}

/// Total length/area of `{u = 0}`; reported only.
pub fn perimeter_diagnostic(u: &ScalarField) -> f64 {
    extract_level_set(u, 0.0).measure()
}

/// Fraction of vertices of `curve` that see both strict signs of `u` among
/// the nodes within distance `radius`.
pub fn two_sided_fraction(u: &ScalarField, curve: &LevelSetCurve, radius: f64) -> f64 {
    let g = u.grid();
    let h = g.h();
    let reach = (radius / h).ceil() as isize;
    let verts: Vec<Point> = curve.vertices().copied().collect();
    if verts.is_empty() {
        return 1.0;
    }
    let ok = par::map_slice(&verts, |p| {
        let c = g.unravel(g.nearest_node(p));
        let (mut pos, mut neg) = (false, false);
        let range = |a: usize| {
            if a < g.dim() {
                -reach..=reach
            } else {
                0..=0
            }
        };
        for dk in range(2) {
            for dj in range(1) {
                for di in range(0) {
                    let ijk = [c[0] as isize + di, c[1] as isize + dj, c[2] as isize + dk];
                    if (0..g.dim()).any(|a| ijk[a] < 0 || ijk[a] > g.cells() as isize) {
                        continue;
                    }
                    let idx = g.index([ijk[0] as usize, ijk[1] as usize, ijk[2] as usize]);
                    if dist(&g.coord(idx), p) > radius {
                        continue;
                    }
                    let v = u.get(idx);
                    pos |= v > 0.0;
                    neg |= v < 0.0;
                }
            }
        }
        pos && neg
    });
    ok.iter().filter(|x| **x).count() as f64 / verts.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use std::f64::consts::PI;

    #[test]
    fn plane() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0]);
        let c = extract_level_set(&u, 0.0);
        assert!((c.measure() - 2.0).abs() < 0.02);
        assert!(c.vertices().all(|p| p[0].abs() < 1e-14));
        assert!(two_sided_fraction(&u, &c, 3.0 * g.h()) == 1.0);
    }

    #[test]
    fn circle() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0] * p[0] + p[1] * p[1] - 0.25);
        let c = extract_level_set(&u, 0.0);
        assert!((c.measure() - PI).abs() / PI < 0.02);
        assert!((perimeter_diagnostic(&u) - PI).abs() / PI < 0.02);
    }

    #[test]
    fn empty() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let u = ScalarField::constant(g, 1.0);
        let c = extract_level_set(&u, 0.0);
        assert!(c.is_empty());
        assert_eq!(c.measure(), 0.0);
    }

    #[test]
    fn sphere_area() {
        let g = Grid::new(3, 1.0, 32).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 0.36);
        let c = extract_level_set(&u, 0.0);
        let exact = 4.0 * PI * 0.36;
        assert!((c.measure() - exact).abs() / exact < 0.03, "{}", c.measure());
        let plane = ScalarField::from_fn(g, |p| p[2] - 0.1 * p[0] - 0.013);
        let c = extract_level_set(&plane, 0.0);
        let exact = 4.0 * (1.0f64 + 0.01).sqrt();
        assert!((c.measure() - exact).abs() / exact < 0.01);
    }

    #[test]
    fn saddle_cells_are_resolved() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let u = ScalarField::from_fn(g, |p| (p[0] - 0.0625) * (p[1] - 0.0625));
        let c = extract_level_set(&u, 0.0);
        assert!((c.measure() - 4.0).abs() < 0.2);
        assert!(c.segments.iter().all(|s| dist(&s[0], &s[1]) > 0.0));
    }
}
