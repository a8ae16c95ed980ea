//! Geometric multigrid V-cycle used as a CG preconditioner on box problems.
//!
//! Coarse links combine two fine links in series (harmonic mean) and then
//! average across the transverse directions with weights 1/4, 1/2, 1/4.
//! Cross terms of matrix problems are dropped on coarse levels; the cycle
//! stays symmetric, which is all CG needs.

use nalgebra::{DMatrix, DVector};

use super::stencil::Stencil;
use crate::field::Grid;
use crate::par;

const PRE_SWEEPS: usize = 2;
const POST_SWEEPS: usize = 2;
const DENSE_LIMIT: usize = 3000;
const COARSE_SWEEPS: usize = 200;

struct Level {
    op: Stencil,
    inv_diag: Vec<f64>,
}

enum Coarsest {
    Dense {
        free: Vec<usize>,
        chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    },
    Smooth,
}

pub struct Multigrid {
    levels: Vec<Level>,
    coarsest: Coarsest,
    omega: f64,
}

fn coarsen(fine: &Stencil) -> Stencil {
    let fg = fine.grid;
    let dim = fg.dim();
    let cg = Grid::coarse(dim, fg.radius(), fg.cells() / 2);
    let fs = fg.strides();
    let nf = fg.cells();
    let nc = cg.cells();
    let mut links = Vec::with_capacity(dim);
    for a in 0..dim {
        let fl = &fine.links[a];
        let mut trans = [0usize; 2];
        let mut nt = 0;
        for b in (0..dim).filter(|&b| b != a) {
            trans[nt] = b;
            nt += 1;
        }
        let trans = &trans[..nt];
        let mut la = vec![0.0; cg.len()];
        par::fill(&mut la, |ci| {
            let cijk = cg.unravel(ci);
            if cijk[a] >= nc {
                return 0.0;
            }
            let base = [2 * cijk[0], 2 * cijk[1], 2 * cijk[2]];
            let mut acc = 0.0;
            let mut wsum = 0.0;
            // transverse offsets in {-1, 0, 1}^(dim-1)
            let combos = 3usize.pow(trans.len() as u32);
            'outer: for t in 0..combos {
                let mut ijk = base;
                let mut w = 1.0;
                let mut code = t;
                for &b in trans {
                    let off = (code % 3) as isize - 1;
                    code /= 3;
                    let v = ijk[b] as isize + off;
                    if v < 0 || v > nf as isize {
                        continue 'outer;
                    }
                    ijk[b] = v as usize;
                    w *= if off == 0 { 0.5 } else { 0.25 };
                }
                let q = fg.index(ijk);
                let (c1, c2) = (fl[q], fl[q + fs[a]]);
                let series = if c1 > 0.0 && c2 > 0.0 {
                    2.0 * c1 * c2 / (c1 + c2)
                } else {
                    0.0
                };
                acc += w * series;
                wsum += w;
            }
            acc / wsum
        });
        links.push(la);
    }
    let free = (0..cg.len()).map(|i| !cg.is_boundary(i)).collect();
    Stencil {
        grid: cg,
        links,
        cross: None,
        free,
    }
}

fn dense_factor(op: &Stencil) -> Option<(Vec<usize>, nalgebra::Cholesky<f64, nalgebra::Dyn>)> {
    let g = op.grid;
    let free: Vec<usize> = (0..g.len()).filter(|&i| op.free[i]).collect();
    if free.is_empty() || free.len() > DENSE_LIMIT {
        return None;
    }
    let mut pos = vec![usize::MAX; g.len()];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = k;
    }
    let scale = g.h().powi(g.dim() as i32 - 2);
    let s = g.strides();
    let n = g.cells();
    let mut m = DMatrix::<f64>::zeros(free.len(), free.len());
    for (k, &p) in free.iter().enumerate() {
        let ijk = g.unravel(p);
        for a in 0..g.dim() {
            let mut add = |q: usize, c: f64| {
                m[(k, k)] += c * scale;
                if pos[q] != usize::MAX {
                    m[(k, pos[q])] -= c * scale;
                }
            };
            if ijk[a] > 0 {
                add(p - s[a], op.links[a][p - s[a]]);
            }
            if ijk[a] < n {
                add(p + s[a], op.links[a][p]);
            }
        }
    }
    m.cholesky().map(|c| (free, c))
}

impl Multigrid {
    pub fn new(fine: &Stencil) -> Multigrid {
        let dim = fine.grid.dim();
        let omega = if dim == 2 { 0.8 } else { 6.0 / 7.0 };
        let mut levels = vec![Level {
            inv_diag: fine.diagonal().iter().map(|d| 1.0 / d).collect(),
            op: fine.clone(),
        }];
        loop {
            let last = &levels.last().unwrap().op;
            let n = last.grid.cells();
            if n % 2 != 0 || n <= 4 {
                break;
            }
            let op = coarsen(last);
            levels.push(Level {
                inv_diag: op.diagonal().iter().map(|d| 1.0 / d).collect(),
                op,
            });
        }
        let coarsest = match dense_factor(&levels.last().unwrap().op) {
            Some((free, chol)) => Coarsest::Dense { free, chol },
            None => Coarsest::Smooth,
        };
        Multigrid {
            levels,
            coarsest,
            omega,
        }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// One V-cycle applied to `r` with zero initial guess.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.cycle(0, r, z);
    }

    fn smooth(&self, lvl: usize, b: &[f64], x: &mut [f64], sweeps: usize) {
        let level = &self.levels[lvl];
        let inv = &level.inv_diag;
        let omega = self.omega;
        let mut next = vec![0.0; x.len()];
        for _ in 0..sweeps {
            let cur: &[f64] = x;
            level
                .op
                .apply_map(cur, &mut next, |i, kx| cur[i] + omega * inv[i] * (b[i] - kx));
            x.copy_from_slice(&next);
        }
    }

    fn cycle(&self, lvl: usize, b: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        if lvl + 1 == self.levels.len() {
            self.solve_coarsest(b, x);
            return;
        }
        self.smooth(lvl, b, x, PRE_SWEEPS);
        let op = &self.levels[lvl].op;
        let mut res = vec![0.0; x.len()];
        op.apply_map(x, &mut res, |i, kx| b[i] - kx);
        let coarse = &self.levels[lvl + 1].op;
        let rc = restrict(&op.grid, &coarse.grid, &res, &coarse.free);
        let mut ec = vec![0.0; coarse.grid.len()];
        self.cycle(lvl + 1, &rc, &mut ec);
        prolong_add(&op.grid, &coarse.grid, &ec, x, &op.free);
        self.smooth(lvl, b, x, POST_SWEEPS);
    }

    fn solve_coarsest(&self, b: &[f64], x: &mut [f64]) {
        let lvl = self.levels.len() - 1;
        match &self.coarsest {
            Coarsest::Dense { free, chol } => {
                let rhs = DVector::from_iterator(free.len(), free.iter().map(|&i| b[i]));
                let sol = chol.solve(&rhs);
                for (k, &i) in free.iter().enumerate() {
                    x[i] = sol[k];
                }
            }
            Coarsest::Smooth => self.smooth(lvl, b, x, COARSE_SWEEPS),
        }
    }
}

/// Weight and coarse index range of fine index `i` along one axis.
#[inline]
fn parents(i: usize) -> [(usize, f64); 2] {
    if i % 2 == 0 {
        [(i / 2, 1.0), (usize::MAX, 0.0)]
    } else {
        [((i - 1) / 2, 0.5), ((i + 1) / 2, 0.5)]
    }
}

fn prolong_add(fg: &Grid, cg: &Grid, ec: &[f64], x: &mut [f64], free: &[bool]) {
    let dim = fg.dim();
    let add = par::map_range(fg.len(), |i| {
        if !free[i] {
            return 0.0;
        }
        let ijk = fg.unravel(i);
        let mut pa = [[(0usize, 0.0f64); 2]; 3];
        for a in 0..dim {
            pa[a] = parents(ijk[a]);
        }
        let mut acc = 0.0;
        let corners = 1usize << dim;
        for m in 0..corners {
            let mut cijk = [0; 3];
            let mut w = 1.0;
            for a in 0..dim {
                let (ci, wi) = pa[a][m >> a & 1];
                if wi == 0.0 {
                    w = 0.0;
                    break;
                }
                cijk[a] = ci;
                w *= wi;
            }
            if w != 0.0 {
                acc += w * ec[cg.index(cijk)];
            }
        }
        acc
    });
    x.iter_mut().zip(add).for_each(|(xi, ai)| *xi += ai);
}

fn restrict(fg: &Grid, cg: &Grid, r: &[f64], cfree: &[bool]) -> Vec<f64> {
    let dim = fg.dim();
    let nf = fg.cells();
    par::map_range(cg.len(), |ci| {
        if !cfree[ci] {
            return 0.0;
        }
        let cijk = cg.unravel(ci);
        let combos = 3usize.pow(dim as u32);
        let mut acc = 0.0;
        'outer: for t in 0..combos {
            let mut ijk = [0; 3];
            let mut w = 1.0;
            let mut code = t;
            for a in 0..dim {
                let off = (code % 3) as isize - 1;
                code /= 3;
                let v = 2 * cijk[a] as isize + off;
                if v < 0 || v > nf as isize {
                    continue 'outer;
                }
                ijk[a] = v as usize;
                w *= if off == 0 { 1.0 } else { 0.5 };
            }
            acc += w * r[fg.index(ijk)];
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace(grid: Grid) -> Stencil {
        Stencil {
            grid,
            links: (0..grid.dim()).map(|_| vec![1.0; grid.len()]).collect(),
            cross: None,
            free: (0..grid.len()).map(|i| !grid.is_boundary(i)).collect(),
        }
    }

    #[test]
    fn transfer_operators_are_adjoint() {
        let fg = Grid::new(2, 1.0, 16).unwrap();
        let cg = Grid::coarse(2, 1.0, 8);
        let ffree: Vec<bool> = (0..fg.len()).map(|i| !fg.is_boundary(i)).collect();
        let cfree: Vec<bool> = (0..cg.len()).map(|i| !cg.is_boundary(i)).collect();
        let ec: Vec<f64> = (0..cg.len())
            .map(|i| if cfree[i] { ((i * 7) % 5) as f64 - 2.0 } else { 0.0 })
            .collect();
        let rf: Vec<f64> = (0..fg.len())
            .map(|i| if ffree[i] { ((i * 3) % 11) as f64 - 5.0 } else { 0.0 })
            .collect();
        let mut pe = vec![0.0; fg.len()];
        prolong_add(&fg, &cg, &ec, &mut pe, &ffree);
        let rr = restrict(&fg, &cg, &rf, &cfree);
        let lhs: f64 = pe.iter().zip(&rf).map(|(a, b)| a * b).sum();
        let rhs: f64 = rr.iter().zip(&ec).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn vcycle_reduces_error() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let op = laplace(g);
        let mg = Multigrid::new(&op);
        assert!(mg.depth() >= 4);
        let b: Vec<f64> = (0..g.len()).map(|i| if op.free[i] { 1.0 } else { 0.0 }).collect();
        let mut x = vec![0.0; g.len()];
        let mut r = b.clone();
        let r0 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        for _ in 0..5 {
            let mut z = vec![0.0; g.len()];
            mg.apply(&r, &mut z);
            x.iter_mut().zip(&z).for_each(|(a, b)| *a += b);
            let kx = op.residual_of(&x);
            r = b.iter().zip(&kx).map(|(a, b)| a - b).collect();
        }
        let r5 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r5 < 1e-3 * r0, "{r5} vs {r0}");
    }
}
