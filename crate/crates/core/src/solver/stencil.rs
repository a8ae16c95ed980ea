//! Matrix-free symmetric stencil operator.
//!
//! The operator is the Hessian of the discrete energy
//! `sum_links c (u_j - u_i)^2 h^(d-2) + sum_cells sum_{a<b} 2 C_ab X_a X_b h^d`
//! where `X_a` is the mean edge difference quotient of a cell along axis
//! `a`. Links carry the diagonal part of the conductivity, cells the
//! off-diagonal part of a matrix conductivity. Rows and columns of fixed
//! (non-free) nodes are removed.

use super::heaviside::{blended, link_coefficient};
use crate::field::Grid;
use crate::matrixext::model::Mat3;
use crate::par;

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone)]
pub struct Stencil {
    pub(crate) grid: Grid,
    /// Per axis, coefficient of the link from node `i` to `i + e_a`.
    pub(crate) links: Vec<Vec<f64>>,
    /// Per cell (indexed by lowest corner), off-diagonal coefficients for
    /// the axis pairs (0,1), (0,2), (1,2).
    pub(crate) cross: Option<Vec<[f64; 3]>>,
    pub(crate) free: Vec<bool>,
}

impl Stencil {
    /// Constant-coefficient Laplacian with Dirichlet nodes on the box boundary.
    pub(crate) fn laplacian(grid: Grid) -> Stencil {
        Stencil {
            grid,
            links: (0..grid.dim()).map(|_| vec![1.0; grid.len()]).collect(),
            cross: None,
            free: (0..grid.len()).map(|i| !grid.is_boundary(i)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn free(&self) -> &[bool] {
        &self.free
    }

    fn scale(&self) -> f64 {
        self.grid.h().powi(self.grid.dim() as i32 - 2)
    }

    fn n_pairs(&self) -> usize {
        if self.grid.dim() == 2 {
            1
        } else {
            3
        }
    }

    /// Mean difference quotients per cell.
    pub(crate) fn cell_slopes(&self, x: &[f64]) -> Vec<[f64; 3]> {
        let g = self.grid;
        let mut out = vec![[0.0; 3]; g.len()];
        let n = g.cells();
        par::fill(&mut out, |lo| {
            let ijk = g.unravel(lo);
            if (0..g.dim()).any(|a| ijk[a] >= n) {
                return [0.0; 3];
            }
            let mut grad = [0.0; 3];
            for (mask, idx) in g.cell_corners(lo) {
                for (a, ga) in grad.iter_mut().enumerate().take(g.dim()) {
                    if mask >> a & 1 == 1 {
                        *ga += x[idx];
                    } else {
                        *ga -= x[idx];
                    }
                }
            }
            let s = 1.0 / ((1usize << (g.dim() - 1)) as f64 * g.h());
            [grad[0] * s, grad[1] * s, grad[2] * s]
        });
        out
    }

    /// Cells adjacent to node `p` as `(cell lowest corner, corner mask of p)`.
    fn adjacent_cells(&self, p: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let g = &self.grid;
        let ijk = g.unravel(p);
        let s = g.strides();
        let n = g.cells();
        let dim = g.dim();
        (0..1usize << dim).filter_map(move |mask| {
            let mut lo = p;
            for a in 0..dim {
                if mask >> a & 1 == 1 {
                    if ijk[a] == 0 {
                        return None;
                    }
                    lo -= s[a];
                } else if ijk[a] >= n {
                    return None;
                }
            }
            Some((lo, mask))
        })
    }

    /// `y = K x` on free rows; fixed rows of `y` are zero. Entries of `x`
    /// at fixed nodes enter as given (pass zeros there for the reduced
    /// operator).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_map(x, y, |_, kx| kx);
    }

    /// Computes `(K x)_p` on free rows and stores `post(p, (K x)_p)`;
    /// fixed rows receive 0.
    pub(crate) fn apply_map<F>(&self, x: &[f64], y: &mut [f64], post: F)
    where
        F: Fn(usize, f64) -> f64 + Sync + Send,
    {
        let g = self.grid;
        let s = g.strides();
        let n = g.cells();
        let side = g.side();
        let dim = g.dim();
        let scale = self.scale();
        let slopes = self.cross.as_ref().map(|_| self.cell_slopes(x));
        let cfac = g.h().powi(dim as i32 - 1) / (1usize << (dim - 1)) as f64;
        let npairs = self.n_pairs();
        let l0 = &self.links[0];
        par::for_rows(y, side, |row, yr| {
            let base = row * side;
            let j = row % side;
            let k = row / side;
            let row_fixed = j == 0 || j == n || (dim == 3 && (k == 0 || k == n));
            if row_fixed {
                yr.iter_mut().for_each(|v| *v = 0.0);
                return;
            }
            for (i, yv) in yr.iter_mut().enumerate() {
                let p = base + i;
                if i == 0 || i == n || !self.free[p] {
                    *yv = 0.0;
                    continue;
                }
                let xp = x[p];
                // interior along every axis: all neighbours exist
                let mut acc = l0[p - 1] * (xp - x[p - 1]) + l0[p] * (xp - x[p + 1]);
                for a in 1..dim {
                    let la = &self.links[a];
                    acc += la[p - s[a]] * (xp - x[p - s[a]]) + la[p] * (xp - x[p + s[a]]);
                }
                acc *= scale;
                if let (Some(cross), Some(slopes)) = (&self.cross, &slopes) {
                    let mut cacc = 0.0;
                    for (lo, mask) in self.adjacent_cells(p) {
                        let c = &cross[lo];
                        let xs = &slopes[lo];
                        for (kk, &(a, b)) in PAIRS.iter().enumerate().take(npairs) {
                            let sa = if mask >> a & 1 == 1 { 1.0 } else { -1.0 };
                            let sb = if mask >> b & 1 == 1 { 1.0 } else { -1.0 };
                            cacc += c[kk] * (sa * xs[b] + sb * xs[a]);
                        }
                    }
                    acc += cfac * cacc;
                }
                *yv = post(p, acc);
            }
        });
    }

    /// Diagonal of the reduced operator (1 on fixed rows).
    pub fn diagonal(&self) -> Vec<f64> {
        let g = self.grid;
        let s = g.strides();
        let n = g.cells();
        let dim = g.dim();
        let scale = self.scale();
        let dfac = 2.0 * g.h().powi(dim as i32 - 2) / (1usize << (2 * (dim - 1))) as f64;
        let npairs = self.n_pairs();
        par::map_range(g.len(), |p| {
            if !self.free[p] {
                return 1.0;
            }
            let ijk = g.unravel(p);
            let mut acc = 0.0;
            for a in 0..dim {
                if ijk[a] > 0 {
                    acc += self.links[a][p - s[a]];
                }
                if ijk[a] < n {
                    acc += self.links[a][p];
                }
            }
            acc *= scale;
            if let Some(cross) = &self.cross {
                for (lo, mask) in self.adjacent_cells(p) {
                    for (k, &(a, b)) in PAIRS.iter().enumerate().take(npairs) {
                        let sa = if mask >> a & 1 == 1 { 1.0 } else { -1.0 };
                        let sb = if mask >> b & 1 == 1 { 1.0 } else { -1.0 };
                        acc += dfac * cross[lo][k] * sa * sb;
                    }
                }
            }
            acc
        })
    }

    /// Applies the operator to a full vector (fixed entries included) and
    /// returns the free-row result.
    pub fn residual_of(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        y
    }

    /// Bilinear form `phi^T K u` restricted to links/cells, without removing
    /// fixed nodes. Used for pairings with compactly supported test fields.
    pub fn bilinear(&self, u: &[f64], phi: &[f64]) -> f64 {
        let g = self.grid;
        let s = g.strides();
        let n = g.cells();
        let dim = g.dim();
        let scale = self.scale();
        let links = par::sum_range(g.len(), |p| {
            let ijk = g.unravel(p);
            let mut acc = 0.0;
            for a in 0..dim {
                if ijk[a] < n {
                    let q = p + s[a];
                    acc += self.links[a][p] * (u[q] - u[p]) * (phi[q] - phi[p]);
                }
            }
            acc
        }) * scale;
        let cross = match &self.cross {
            None => 0.0,
            Some(cross) => {
                let su = self.cell_slopes(u);
                let sp = self.cell_slopes(phi);
                let npairs = self.n_pairs();
                par::sum_range(g.len(), |lo| {
                    let ijk = g.unravel(lo);
                    if (0..dim).any(|a| ijk[a] >= n) {
                        return 0.0;
                    }
                    PAIRS
                        .iter()
                        .enumerate()
                        .take(npairs)
                        .map(|(k, &(a, b))| {
                            cross[lo][k] * (su[lo][a] * sp[lo][b] + su[lo][b] * sp[lo][a])
                        })
                        .sum::<f64>()
                }) * g.h().powi(dim as i32)
            }
        };
        links + cross
    }
}

/// Inputs for assembling the two-phase operator at a given iterate.
pub(crate) struct Assembly<'a> {
    pub grid: Grid,
    pub aplus: &'a [f64],
    pub aminus: &'a [f64],
    pub matrix: Option<&'a [Mat3]>,
    pub with_cross: bool,
    pub eps: f64,
}

impl Assembly<'_> {
    pub fn stencil(&self, u: &[f64]) -> Stencil {
        let g = self.grid;
        let s = g.strides();
        let n = g.cells();
        let dim = g.dim();
        let mut links = Vec::with_capacity(dim);
        for a in 0..dim {
            let mut la = vec![0.0; g.len()];
            par::fill(&mut la, |i| {
                let ijk = g.unravel(i);
                if ijk[a] >= n {
                    return 0.0;
                }
                let j = i + s[a];
                let c = link_coefficient(
                    (self.aminus[i], self.aminus[j]),
                    (self.aplus[i], self.aplus[j]),
                    (u[i], u[j]),
                    self.eps,
                );
                match self.matrix {
                    Some(pm) => c * (0.5 * (pm[i][a][a] + pm[j][a][a])),
                    None => c,
                }
            });
            links.push(la);
        }
        let cross = match (self.matrix, self.with_cross) {
            (Some(pm), true) => {
                let mut cr = vec![[0.0; 3]; g.len()];
                let corners = (1usize << dim) as f64;
                par::fill(&mut cr, |lo| {
                    let ijk = g.unravel(lo);
                    if (0..dim).any(|a| ijk[a] >= n) {
                        return [0.0; 3];
                    }
                    let mut c = 0.0;
                    let mut pab = [0.0; 3];
                    for (_, idx) in g.cell_corners(lo) {
                        c += blended(self.aminus[idx], self.aplus[idx], self.eps, u[idx]);
                        for (k, &(a, b)) in PAIRS.iter().enumerate() {
                            pab[k] += pm[idx][a][b];
                        }
                    }
                    c /= corners;
                    [
                        c * pab[0] / corners,
                        c * pab[1] / corners,
                        c * pab[2] / corners,
                    ]
                });
                Some(cr)
            }
            _ => None,
        };
        let free = (0..g.len()).map(|i| !g.is_boundary(i)).collect();
        Stencil {
            grid: g,
            links,
            cross,
            free,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(grid: Grid, c: f64) -> Stencil {
        let links = (0..grid.dim()).map(|_| vec![c; grid.len()]).collect();
        let free = (0..grid.len()).map(|i| !grid.is_boundary(i)).collect();
        Stencil {
            grid,
            links,
            cross: None,
            free,
        }
    }

    #[test]
    fn affine_in_kernel() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let st = uniform(g, 1.7);
        let x: Vec<f64> = (0..g.len()).map(|i| 2.0 * g.coord(i)[0] - g.coord(i)[1]).collect();
        let y = st.residual_of(&x);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn symmetric_with_cross_terms() {
        let g = Grid::new(2, 1.0, 16).unwrap();
        let mut st = uniform(g, 1.0);
        st.cross = Some(
            (0..g.len())
                .map(|i| [0.1 + 0.01 * (i % 7) as f64, 0.0, 0.0])
                .collect(),
        );
        let free = st.free.clone();
        let v1: Vec<f64> = (0..g.len())
            .map(|i| if free[i] { ((i * 37) % 11) as f64 - 5.0 } else { 0.0 })
            .collect();
        let v2: Vec<f64> = (0..g.len())
            .map(|i| if free[i] { ((i * 13) % 7) as f64 - 3.0 } else { 0.0 })
            .collect();
        let a1 = st.residual_of(&v1);
        let a2 = st.residual_of(&v2);
        let lhs: f64 = a1.iter().zip(&v2).map(|(a, b)| a * b).sum();
        let rhs: f64 = a2.iter().zip(&v1).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
        // bilinear form agrees with the operator on vectors vanishing on fixed nodes
        let b = st.bilinear(&v1, &v2);
        assert!((b - lhs).abs() < 1e-9 * lhs.abs().max(1.0));
        // diagonal matches e_i^T K e_i
        let d = st.diagonal();
        let p = g.index([5, 7, 0]);
        let mut e = vec![0.0; g.len()];
        e[p] = 1.0;
        let ke = st.residual_of(&e);
        assert!((ke[p] - d[p]).abs() < 1e-12);
    }
}
