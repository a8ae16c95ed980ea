//! Ball quadrature on the node lattice.
//!
//! Volume fractions of boundary cells are estimated with a `4^dim`
//! subsample lattice. Node-based rules weight each node by the part of its
//! dual cell that lies inside the ball; cell-based rules weight each cell
//! (used for piecewise-constant gradients).

use super::grid::{Grid, Point};
use super::scalar::ScalarField;
use crate::error::{Error, Result};
use crate::par;

const SUB: usize = 4;

/// Geometry of the integration region: the set `{ x : |Q (x - z)| < r }`
/// for an optional linear map `Q` (identity when absent).
#[derive(Debug, Clone, Copy)]
pub struct Region {
    pub center: Point,
    pub radius: f64,
    pub metric: Option<[[f64; 3]; 3]>,
}

impl Region {
    pub fn ball(center: Point, radius: f64) -> Region {
        Region {
            center,
            radius,
            metric: None,
        }
    }

    fn mapped(&self, p: &Point) -> Point {
        let d = [p[0] - self.center[0], p[1] - self.center[1], p[2] - self.center[2]];
        match &self.metric {
            None => d,
            Some(q) => {
                let mut out = [0.0; 3];
                for (i, row) in q.iter().enumerate() {
                    out[i] = row[0] * d[0] + row[1] * d[1] + row[2] * d[2];
                }
                out
            }
        }
    }

    /// Distance in the region's metric.
    pub fn rho(&self, p: &Point) -> f64 {
        super::grid::norm(&self.mapped(p))
    }

    /// Axis-aligned half extents of the region.
    fn half_extents(&self, dim: usize) -> [f64; 3] {
        match &self.metric {
            None => [self.radius; 3],
            Some(q) => {
                let qm = nalgebra::Matrix3::from_fn(|i, j| {
                    if i < dim && j < dim {
                        q[i][j]
                    } else if i == j {
                        1.0
                    } else {
                        0.0
                    }
                });
                let inv = qm.try_inverse().unwrap_or_else(nalgebra::Matrix3::identity);
                let m = inv * inv.transpose();
                [
                    self.radius * m[(0, 0)].sqrt(),
                    self.radius * m[(1, 1)].sqrt(),
                    self.radius * m[(2, 2)].sqrt(),
                ]
            }
        }
    }

    pub fn check_inside(&self, grid: &Grid) -> Result<()> {
        let e = self.half_extents(grid.dim());
        let slack = 1e-12 * grid.radius();
        for a in 0..grid.dim() {
            if self.center[a].abs() + e[a] > grid.radius() + slack {
                return Err(Error::BallOutsideDomain {
                    center: self.center,
                    radius: self.radius,
                });
            }
        }
        Ok(())
    }
}

/// Kind of weight applied inside the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Unit,
    /// `rho^(2-n)` with `rho` the region metric distance to the center.
    Singular,
}

/// Index box of lattice points (nodes or cells) that may meet the region.
fn candidate_box(grid: &Grid, region: &Region, cells: bool) -> ([usize; 3], [usize; 3]) {
    let e = region.half_extents(grid.dim());
    let top = if cells { grid.cells() - 1 } else { grid.cells() };
    let mut lo = [0; 3];
    let mut hi = [0; 3];
    for a in 0..grid.dim() {
        let t0 = ((region.center[a] - e[a] + grid.radius()) / grid.h()).floor() - 1.0;
        let t1 = ((region.center[a] + e[a] + grid.radius()) / grid.h()).ceil() + 1.0;
        lo[a] = (t0.max(0.0) as usize).min(top);
        hi[a] = (t1.max(0.0) as usize).min(top);
    }
    (lo, hi)
}

fn box_points(grid: &Grid, lo: [usize; 3], hi: [usize; 3]) -> Vec<[usize; 3]> {
    let dim = grid.dim();
    let mut out = Vec::new();
    let k_range = if dim == 3 { lo[2]..=hi[2] } else { 0..=0 };
    for k in k_range {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// Integrates `weight` over the inside part of the axis box starting at
/// `corner` with side `h`, using the subsample lattice.
fn box_integral(grid: &Grid, region: &Region, corner: &Point, weight: Weight) -> f64 {
    let dim = grid.dim();
    let h = grid.h();
    let sub_h = h / SUB as f64;
    let sub_vol = sub_h.powi(dim as i32);
    // whole-box shortcut for unit weight without metric
    if weight == Weight::Unit && region.metric.is_none() {
        let mut c = *corner;
        for v in c.iter_mut().take(dim) {
            *v += 0.5 * h;
        }
        let d = region.rho(&c);
        let half_diag = 0.5 * h * (dim as f64).sqrt();
        if d + half_diag <= region.radius {
            return h.powi(dim as i32);
        }
        if d - half_diag >= region.radius {
            return 0.0;
        }
    }
    let n3 = if dim == 3 { SUB } else { 1 };
    let mut acc = 0.0;
    for k in 0..n3 {
        for j in 0..SUB {
            for i in 0..SUB {
                let mut p = *corner;
                p[0] += (i as f64 + 0.5) * sub_h;
                p[1] += (j as f64 + 0.5) * sub_h;
                if dim == 3 {
                    p[2] += (k as f64 + 0.5) * sub_h;
                }
                let rho = region.rho(&p);
                if rho < region.radius {
                    acc += match weight {
                        Weight::Unit => 1.0,
                        Weight::Singular => singular_weight(rho, dim, h),
                    };
                }
            }
        }
    }
    acc * sub_vol
}

fn singular_weight(rho: f64, dim: usize, h: f64) -> f64 {
    if dim == 2 {
        1.0
    } else {
        // never evaluate at the singular point itself
        let rho = if rho < h / 16.0 { 0.5 * h } else { rho };
        rho.powi(2 - dim as i32)
    }
}

/// Nodes whose dual cells meet the region, with their (fractional) volume.
pub fn node_weights(grid: &Grid, region: &Region) -> Result<Vec<(usize, f64)>> {
    region.check_inside(grid)?;
    let (lo, hi) = candidate_box(grid, region, false);
    let pts = box_points(grid, lo, hi);
    let h = grid.h();
    let weights = par::map_slice(&pts, |ijk| {
        let idx = grid.index(*ijk);
        let mut corner = grid.coord(idx);
        for v in corner.iter_mut().take(grid.dim()) {
            *v -= 0.5 * h;
        }
        (idx, box_integral(grid, region, &corner, Weight::Unit))
    });
    Ok(weights.into_iter().filter(|(_, w)| *w > 0.0).collect())
}

/// Cells meeting the region (by lowest-corner node index) with the
/// integral of the weight over their inside part.
pub fn cell_weights(grid: &Grid, region: &Region, weight: Weight) -> Result<Vec<(usize, f64)>> {
    region.check_inside(grid)?;
    let (lo, hi) = candidate_box(grid, region, true);
    let pts = box_points(grid, lo, hi);
    let weights = par::map_slice(&pts, |ijk| {
        let idx = grid.index(*ijk);
        let corner = grid.coord(idx);
        (idx, box_integral(grid, region, &corner, weight))
    });
    Ok(weights.into_iter().filter(|(_, w)| *w > 0.0).collect())
}

/// `(int_{B_r(z)} u^2)^(1/2)` by the node rule.
pub fn l2_ball_norm(u: &ScalarField, z: &Point, r: f64) -> Result<f64> {
    let w = node_weights(u.grid(), &Region::ball(*z, r))?;
    Ok(w.iter().map(|&(i, wi)| wi * u.get(i).powi(2)).sum::<f64>().sqrt())
}

/// `int_{B_r(z)} f` of a nodal field by the node rule.
pub fn ball_integral(u: &ScalarField, z: &Point, r: f64) -> Result<f64> {
    let w = node_weights(u.grid(), &Region::ball(*z, r))?;
    Ok(w.iter().map(|&(i, wi)| wi * u.get(i)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_field_area() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let u = ScalarField::constant(g, 1.0);
        let n = l2_ball_norm(&u, &[0.0; 3], 0.5).unwrap();
        let exact = (PI * 0.25).sqrt();
        assert!((n - exact).abs() / exact < 0.02, "{n} vs {exact}");
    }

    #[test]
    fn zero_field() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::zeros(g);
        assert_eq!(l2_ball_norm(&u, &[0.0; 3], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn linear_field_second_moment() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0]);
        let n = l2_ball_norm(&u, &[0.0; 3], 0.5).unwrap();
        let exact = (PI * 0.5f64.powi(4) / 4.0).sqrt();
        assert!((n - exact).abs() / exact < 0.02, "{n} vs {exact}");
    }

    #[test]
    fn ball_must_fit() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let u = ScalarField::zeros(g);
        assert!(matches!(
            l2_ball_norm(&u, &[0.8, 0.0, 0.0], 0.5),
            Err(Error::BallOutsideDomain { .. })
        ));
    }

    #[test]
    fn weights_nonnegative_and_sum_to_volume() {
        let g = Grid::new(3, 1.0, 32).unwrap();
        let reg = Region::ball([0.1, 0.0, -0.05], 0.6);
        let w = node_weights(&g, &reg).unwrap();
        assert!(w.iter().all(|&(_, v)| v >= 0.0));
        let vol: f64 = w.iter().map(|p| p.1).sum();
        let exact = 4.0 / 3.0 * PI * 0.6f64.powi(3);
        assert!((vol - exact).abs() / exact < 0.01);
        let c = cell_weights(&g, &reg, Weight::Unit).unwrap();
        let vol_c: f64 = c.iter().map(|p| p.1).sum();
        assert!((vol_c - exact).abs() / exact < 0.01);
    }

    #[test]
    fn singular_weight_3d() {
        // int_{B_r} |x|^{-1} = 2 pi r^2
        let g = Grid::new(3, 1.0, 32).unwrap();
        let c = cell_weights(&g, &Region::ball([0.0; 3], 0.5), Weight::Singular).unwrap();
        let s: f64 = c.iter().map(|p| p.1).sum();
        let exact = 2.0 * PI * 0.25;
        assert!((s - exact).abs() / exact < 0.02, "{s} vs {exact}");
    }

    #[test]
    fn ellipse_area() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        // |Q x| < r with Q = diag(1/a, 1/b): ellipse with semi-axes a r, b r
        let q = [[1.0 / 1.5, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let reg = Region {
            center: [0.0; 3],
            radius: 0.4,
            metric: Some(q),
        };
        let c = cell_weights(&g, &reg, Weight::Unit).unwrap();
        let area: f64 = c.iter().map(|p| p.1).sum();
        let exact = PI * 0.6 * 0.4;
        assert!((area - exact).abs() / exact < 0.01);
    }
}
