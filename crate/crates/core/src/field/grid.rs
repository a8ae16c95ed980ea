use crate::error::{Error, Result};

/// A point in up to three dimensions; unused trailing components are zero.
pub type Point = [f64; 3];

/// Uniform node lattice covering the closed box `[-radius, radius]^dim`.
///
/// Node coordinates are `(i - cells/2) * h` componentwise, so the origin is
/// always a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: usize,
    radius: f64,
    h: f64,
}

impl Grid {
    /// Builds a grid with `cells_per_side` cells along every axis.
    pub fn new(dim: usize, radius: f64, cells_per_side: usize) -> Result<Grid> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{2, 3}}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius {radius} must be positive")));
        }
        if cells_per_side % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "cells per side {cells_per_side} is odd; the origin must be a node"
            )));
        }
        if cells_per_side < 16 {
            return Err(Error::InvalidGrid(format!(
                "cells per side {cells_per_side} < 16"
            )));
        }
        Ok(Grid {
            dim,
            cells: cells_per_side,
            radius,
            h: 2.0 * radius / cells_per_side as f64,
        })
    }

    /// Internal constructor without the resolution floor, used for coarse
    /// multigrid levels.
    pub(crate) fn coarse(dim: usize, radius: f64, cells: usize) -> Grid {
        Grid {
            dim,
            cells,
            radius,
            h: 2.0 * radius / cells as f64,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Nodes per side.
    pub fn side(&self) -> usize {
        self.cells + 1
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of cells (each identified by its lowest corner node).
    pub fn cell_count(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    /// Index strides along each axis.
    pub fn strides(&self) -> [usize; 3] {
        let n = self.side();
        [1, n, n * n]
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        let s = self.strides();
        (0..self.dim).map(|a| ijk[a] * s[a]).sum()
    }

    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let n = self.side();
        let mut out = [0; 3];
        for o in out.iter_mut().take(self.dim) {
            *o = idx % n;
            idx /= n;
        }
        out
    }

    /// Coordinate of a lattice index along one axis.
    pub fn coord1(&self, i: usize) -> f64 {
        (i as i64 - (self.cells / 2) as i64) as f64 * self.h
    }

    pub fn coord(&self, idx: usize) -> Point {
        let ijk = self.unravel(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.coord1(ijk[a]);
        }
        p
    }

    /// Whether a node lies on the box boundary.
    pub fn is_boundary(&self, idx: usize) -> bool {
        let ijk = self.unravel(idx);
        (0..self.dim).any(|a| ijk[a] == 0 || ijk[a] == self.cells)
    }

    /// Cell index `i` of the lowest corner of the cell containing `x`
    /// along one axis, clamped into `[0, cells-1]`, plus the local offset.
    pub fn locate1(&self, x: f64) -> (usize, f64) {
        let t = (x + self.radius) / self.h;
        let i = (t.floor().max(0.0) as usize).min(self.cells - 1);
        (i, (t - i as f64).clamp(0.0, 1.0))
    }

    /// Nearest node to a point (clamped into the box).
    pub fn nearest_node(&self, p: &Point) -> usize {
        let mut ijk = [0; 3];
        for a in 0..self.dim {
            let t = ((p[a] + self.radius) / self.h).round();
            ijk[a] = (t.max(0.0) as usize).min(self.cells);
        }
        self.index(ijk)
    }

    /// Whether the closed ball `B_r(z)` lies inside the box.
    pub fn contains_ball(&self, z: &Point, r: f64) -> bool {
        let slack = 1e-12 * self.radius;
        (0..self.dim).all(|a| z[a].abs() + r <= self.radius + slack)
    }

    pub fn require_ball(&self, z: &Point, r: f64) -> Result<()> {
        if self.contains_ball(z, r) {
            Ok(())
        } else {
            Err(Error::BallOutsideDomain { center: *z, radius: r })
        }
    }

    /// Iterates over the `2^dim` corner nodes of the cell whose lowest
    /// corner is `lo`. Bit `a` of the returned mask says whether the corner
    /// sits on the high side along axis `a`.
    pub fn cell_corners(&self, lo: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let s = self.strides();
        (0..1usize << self.dim).map(move |mask| {
            let mut idx = lo;
            for (a, stride) in s.iter().enumerate().take(self.dim) {
                if mask >> a & 1 == 1 {
                    idx += stride;
                }
            }
            (mask, idx)
        })
    }

    /// Node index of the lowest corner of cell number `c` (cells enumerated
    /// with axis 0 fastest).
    pub fn cell_lo(&self, mut c: usize) -> usize {
        let mut ijk = [0; 3];
        for v in ijk.iter_mut().take(self.dim) {
            *v = c % self.cells;
            c /= self.cells;
        }
        self.index(ijk)
    }

    /// Center of the cell whose lowest corner is node `lo`.
    pub fn cell_center(&self, lo: usize) -> Point {
        let mut p = self.coord(lo);
        for v in p.iter_mut().take(self.dim) {
            *v += 0.5 * self.h;
        }
        p
    }
}

pub fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn norm(a: &Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        assert_eq!(g.h(), 0.03125);
        assert_eq!(g.side(), 65);
        assert_eq!(g.len(), 65 * 65);
        let g = Grid::new(3, 1.0, 32).unwrap();
        assert_eq!(g.h(), 0.0625);
        assert_eq!(g.len(), 33 * 33 * 33);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Grid::new(2, 1.0, 15), Err(Error::InvalidGrid(_))));
        assert!(Grid::new(2, 1.0, 14).is_err());
        assert!(Grid::new(4, 1.0, 32).is_err());
        assert!(Grid::new(2, -1.0, 32).is_err());
    }

    #[test]
    fn origin_is_node_and_coords_exact() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let o = g.nearest_node(&[0.0; 3]);
        assert_eq!(g.coord(o), [0.0; 3]);
        for idx in [0, 17, 1000, g.len() - 1] {
            let p = g.coord(idx);
            for v in p.iter().take(2) {
                let k = v / g.h();
                assert_eq!(k, k.round());
            }
        }
        assert_eq!(g.unravel(g.index([3, 5, 0])), [3, 5, 0]);
    }
}
