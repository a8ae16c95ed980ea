//! Discrete harmonic replacement on the unit ball.
//!
//! Unknowns are the nodes strictly inside `B_1`. Near the sphere the
//! Shortley-Weller stencil is used: a link leaving the ball is cut at
//! fraction `theta` of its length. The Dirichlet value at the cut is
//! extrapolated along the link from the outside nodes only, so the
//! replacement of a replacement reproduces it.

use crate::error::{Error, Result};
use crate::field::grid::norm;
use crate::field::{Point, ScalarField};
use crate::par;
use crate::solver::cg::bicgstab;

const THETA_MIN: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Replacement {
    /// Harmonic inside `B_1`, equal to the input outside.
    pub h: ScalarField,
    /// Central-difference gradient at the origin.
    pub grad0: Point,
    pub iterations: usize,
}

/// Neighbour of an inside node with its row weight: another unknown, or a
/// cut carrying a boundary value.
#[derive(Clone, Copy)]
enum Link {
    Inner(usize, f64),
    Cut(f64, f64),
}

/// Requires the grid to contain `B_1` around the origin and the origin to
/// be a node.
pub fn harmonic_replacement(w: &ScalarField) -> Result<Replacement> {
    let g = *w.grid();
    let dim = g.dim();
    g.require_ball(&[0.0; 3], 1.0)?;
    if g.cells() % 2 != 0 {
        return Err(Error::InvalidGrid("harmonic replacement needs a node at the origin".into()));
    }
    if w.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite data for harmonic replacement".into()));
    }
    let inside: Vec<bool> = (0..g.len()).map(|i| norm(&g.coord(i)) < 1.0 - 1e-12).collect();
    let s = g.strides();
    let n = g.cells();
    let rows: Vec<(f64, Vec<Link>)> = par::map_range(g.len(), |p| {
        if !inside[p] {
            return (1.0, Vec::new());
        }
        let ijk = g.unravel(p);
        let xp = g.coord(p);
        let r2 = norm(&xp).powi(2);
        let mut diag = 0.0;
        let mut out = Vec::with_capacity(2 * dim);
        for a in 0..dim {
            // (theta, neighbour) for both directions
            let sides = [-1isize, 1].map(|dir| {
                // inside nodes never touch the box faces of a grid containing B_1
                let q = (p as isize + dir * s[a] as isize) as usize;
                if inside[q] {
                    return (1.0, None, q);
                }
                // |xp + t dir e_a| = 1
                let c = xp[a] * dir as f64;
                let t = -c + (c * c + 1.0 - r2).sqrt();
                let theta = (t / g.h()).clamp(THETA_MIN, 1.0);
                let wq = w.get(q);
                let beyond = ijk[a] as isize + 2 * dir;
                let value = if theta >= 1.0 || beyond < 0 || beyond > n as isize {
                    wq
                } else {
                    let q2 = (q as isize + dir * s[a] as isize) as usize;
                    wq + (w.get(q2) - wq) * (theta - 1.0)
                };
                (theta, Some(value), q)
            });
            let sum = sides[0].0 + sides[1].0;
            for (theta, cut, q) in sides {
                let c = 2.0 / (sum * theta);
                diag += c;
                out.push(match cut {
                    Some(v) => Link::Cut(c, v),
                    None => Link::Inner(q, c),
                });
            }
        }
        (diag, out)
    });
    let b: Vec<f64> = par::map_range(g.len(), |p| {
        rows[p]
            .1
            .iter()
            .map(|l| match l {
                Link::Cut(c, v) => c * v,
                Link::Inner(..) => 0.0,
            })
            .sum()
    });
    let apply = |x: &[f64], y: &mut [f64]| {
        par::fill(y, |p| {
            if !inside[p] {
                return 0.0;
            }
            let mut acc = rows[p].0 * x[p];
            for l in &rows[p].1 {
                if let Link::Inner(q, c) = l {
                    acc -= c * x[*q];
                }
            }
            acc
        });
    };
    let jacobi = |r: &[f64], z: &mut [f64]| {
        par::fill(z, |p| if inside[p] { r[p] / rows[p].0 } else { 0.0 });
    };
    let bnorm = par::dot(&b, &b).sqrt();
    let mut x: Vec<f64> = (0..g.len()).map(|p| if inside[p] { w.get(p) } else { 0.0 }).collect();
    let stats = bicgstab(apply, jacobi, &b, &mut x, 1e-13 * bnorm.max(f64::MIN_POSITIVE), 20 * g.len())?;
    if !stats.converged {
        return Err(Error::LinearSolverBreakdown(format!(
            "harmonic replacement stopped at residual {:e}",
            stats.residual
        )));
    }
    let vals: Vec<f64> = (0..g.len()).map(|p| if inside[p] { x[p] } else { w.get(p) }).collect();
    let h = ScalarField::new(g, vals)?;
    let o = g.nearest_node(&[0.0; 3]);
    let mut grad0 = [0.0; 3];
    for a in 0..dim {
        grad0[a] = (h.get(o + s[a]) - h.get(o - s[a])) / (2.0 * g.h());
    }
    Ok(Replacement {
        h,
        grad0,
        iterations: stats.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::rescale::unit_grid;

    fn inside_err(a: &ScalarField, f: impl Fn(&Point) -> f64) -> f64 {
        let g = a.grid();
        (0..g.len())
            .filter(|&i| norm(&g.coord(i)) < 1.0)
            .map(|i| (a.get(i) - f(&g.coord(i))).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn harmonic_data_kept() {
        let g = unit_grid(2);
        let w = ScalarField::from_fn(g, |p| p[0] * p[1]);
        let r = harmonic_replacement(&w).unwrap();
        assert!(inside_err(&r.h, |p| p[0] * p[1]) < 1e-10);
        assert!(norm(&r.grad0) < 1e-10);
    }

    #[test]
    fn radial_and_cosine_data() {
        let g = unit_grid(2);
        let w = ScalarField::from_fn(g, |p| p[0] * p[0] + p[1] * p[1]);
        let r = harmonic_replacement(&w).unwrap();
        assert!(inside_err(&r.h, |_| 1.0) < 2e-3);
        assert!(norm(&r.grad0) < 1e-10);
        let w = ScalarField::from_fn(g, |p| p[0] * p[0]);
        let r = harmonic_replacement(&w).unwrap();
        assert!(inside_err(&r.h, |p| 0.5 + 0.5 * (p[0] * p[0] - p[1] * p[1])) < 5e-3);
        assert!(norm(&r.grad0) < 1e-10);
    }

    #[test]
    fn idempotent() {
        let g = unit_grid(2);
        let w = ScalarField::from_fn(g, |p| (2.0 * p[0]).sin() + p[1].powi(3));
        let a = harmonic_replacement(&w).unwrap();
        let b = harmonic_replacement(&a.h).unwrap();
        assert!(a.h.max_diff(&b.h) < 1e-9);
    }
}
