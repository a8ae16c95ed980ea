//! Two-sided flux integrals `int_{u = +eps} a+ |grad u| eta` and
//! `int_{u = -eps} a- |grad u| eta` and their limits as `eps -> 0`.

use super::bump::BumpTest;
use super::levelset::{edge_vertex, extract_keyed, EdgeKey};
use crate::error::{Error, Result};
use crate::field::grid::{dist, norm};
use crate::field::{gradient_field, Point, ScalarField};
use crate::par;
use crate::solver::TwoPhaseProblem;

#[derive(Debug, Clone)]
pub struct FluxBalance {
    /// Levels that produced nonempty curves on both sides.
    pub eps: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// Levels dropped because a level set was empty.
    pub skipped: Vec<f64>,
    pub plus_limit: f64,
    pub minus_limit: f64,
    /// `|plus_limit - minus_limit| / max(|plus_limit|, |minus_limit|)`, 0
    /// when both vanish.
    pub mismatch: f64,
}

/// Gradient magnitude at node `q` from differences that stay inside the
/// phase (`inside(v)`); central where both neighbours qualify.
fn phase_gradient(u: &ScalarField, q: usize, inside: &dyn Fn(f64) -> bool) -> f64 {
    let g = u.grid();
    let s = g.strides();
    let ijk = g.unravel(q);
    let h = g.h();
    let mut grad = [0.0; 3];
    for a in 0..g.dim() {
        let fwd = (ijk[a] < g.cells()).then(|| q + s[a]);
        let bwd = (ijk[a] > 0).then(|| q - s[a]);
        let fin = fwd.filter(|&i| inside(u.get(i)));
        let bin = bwd.filter(|&i| inside(u.get(i)));
        grad[a] = match (fin, bin) {
            (Some(f), Some(b)) => (u.get(f) - u.get(b)) / (2.0 * h),
            (Some(f), None) => (u.get(f) - u.get(q)) / h,
            (None, Some(b)) => (u.get(q) - u.get(b)) / h,
            (None, None) => match (fwd, bwd) {
                (Some(f), _) => (u.get(f) - u.get(q)) / h,
                (None, Some(b)) => (u.get(q) - u.get(b)) / h,
                _ => 0.0,
            },
        };
    }
    norm(&grad)
}

/// Integral of `a |grad u| eta` over `{u = level}`; the phase is `u > level`
/// when `plus`, `u <= level` otherwise.
fn side_integral(u: &ScalarField, problem: &TwoPhaseProblem, eta: &BumpTest, level: f64, plus: bool) -> Option<f64> {
    let keyed = extract_keyed(u, level);
    if keyed.segments.is_empty() && keyed.facets.is_empty() {
        return None;
    }
    let inside = move |v: f64| if plus { v > level } else { v <= level };
    let integrand = |key: EdgeKey| -> (Point, f64) {
        let p = edge_vertex(u, level, key);
        let e = eta.value(&p);
        if e == 0.0 {
            return (p, 0.0);
        }
        let q = if inside(u.get(key.0)) { key.0 } else { key.1 };
        let a = if plus { problem.aplus_at(&p) } else { problem.aminus_at(&p) };
        (p, a * phase_gradient(u, q, &inside) * e)
    };
    let segs = par::map_slice(&keyed.segments, |[k0, k1]| {
        let (p0, f0) = integrand(*k0);
        let (p1, f1) = integrand(*k1);
        0.5 * (f0 + f1) * dist(&p0, &p1)
    });
    let tris = par::map_slice(&keyed.facets, |ks| {
        let v: Vec<(Point, f64)> = ks.iter().map(|k| integrand(*k)).collect();
        let a = [v[1].0[0] - v[0].0[0], v[1].0[1] - v[0].0[1], v[1].0[2] - v[0].0[2]];
        let b = [v[2].0[0] - v[0].0[0], v[2].0[1] - v[0].0[1], v[2].0[2] - v[0].0[2]];
        let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        0.5 * norm(&c) * (v[0].1 + v[1].1 + v[2].1) / 3.0
    });
    Some(segs.iter().chain(&tris).sum())
}

/// Value at 0 of the least-squares polynomial through `(x_i, y_i)`, of
/// degree `min(2, len - 1)`.
fn extrapolate(x: &[f64], y: &[f64]) -> f64 {
    let deg = (x.len() - 1).min(2);
    let scale = x.iter().copied().fold(0.0, f64::max);
    let a = nalgebra::DMatrix::from_fn(x.len(), deg + 1, |i, j| (x[i] / scale).powi(j as i32));
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    match svd.solve(&b, 1e-14) {
        Ok(c) => c[0],
        Err(_) => f64::NAN,
    }
}

/// Evaluates both flux integrals at each level and extrapolates
/// polynomially in `eps` to `eps = 0`.
pub fn flux_balance(u: &ScalarField, problem: &TwoPhaseProblem, eta: &BumpTest, eps: &[f64]) -> Result<FluxBalance> {
    let g = u.grid();
    eta.check_inside(g)?;
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(format!(
            "levels {eps:?} must be positive and strictly decreasing"
        )));
    }
    let du = gradient_field(u);
    let gmax = par::max_range(g.len(), |i| du.magnitude(i));
    let floor = 2.0 * g.h() * gmax;
    let emin = *eps.last().unwrap();
    if emin < floor * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "level {emin:e} is below the resolvable floor 2 h max|grad u| = {floor:e}"
        )));
    }
    let mut out = FluxBalance {
        eps: Vec::new(),
        plus: Vec::new(),
        minus: Vec::new(),
        skipped: Vec::new(),
        plus_limit: f64::NAN,
        minus_limit: f64::NAN,
        mismatch: f64::NAN,
    };
    for &e in eps {
        match (
            side_integral(u, problem, eta, e, true),
            side_integral(u, problem, eta, -e, false),
        ) {
            (Some(p), Some(m)) => {
                out.eps.push(e);
                out.plus.push(p);
                out.minus.push(m);
            }
            _ => {
                log::info!("level {e:e}: empty level set, skipped");
                out.skipped.push(e);
            }
        }
    }
    if out.eps.is_empty() {
        return Ok(out);
    }
    out.plus_limit = extrapolate(&out.eps, &out.plus);
    out.minus_limit = extrapolate(&out.eps, &out.minus);
    let scale = out.plus_limit.abs().max(out.minus_limit.abs());
    out.mismatch = if scale == 0.0 {
        0.0
    } else {
        (out.plus_limit - out.minus_limit).abs() / scale
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    #[test]
    fn two_plane_balance() {
        let g = Grid::new(2, 1.0, 256).unwrap();
        let p = TwoPhaseProblem::two_plane(2.0, 1.0, 1.0, 0.4).unwrap();
        let u = p.boundary_field(&g);
        let eta = BumpTest::new([0.0, 0.05, 0.0], 0.4).unwrap();
        let f = flux_balance(&u, &p, &eta, &[0.05, 0.04, 0.03, 0.02]).unwrap();
        let exact = eta.line_integral();
        assert!(f.mismatch < 0.02, "{f:?}");
        assert!((f.plus_limit - exact).abs() / exact < 0.02);
        assert!((f.minus_limit - exact).abs() / exact < 0.02);
    }

    #[test]
    fn away_from_interface() {
        let g = Grid::new(2, 1.0, 64).unwrap();
        let p = TwoPhaseProblem::two_plane(2.0, 1.0, 1.0, 0.4).unwrap();
        let u = p.boundary_field(&g);
        let eta = BumpTest::new([0.7, 0.0, 0.0], 0.15).unwrap();
        let f = flux_balance(&u, &p, &eta, &[0.2, 0.1]).unwrap();
        assert!(f.plus.iter().chain(&f.minus).all(|v| *v == 0.0));
        assert_eq!(f.mismatch, 0.0);
    }

    #[test]
    fn unresolvable_levels_rejected() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let p = TwoPhaseProblem::two_plane(2.0, 1.0, 1.0, 0.4).unwrap();
        let u = p.boundary_field(&g);
        let eta = BumpTest::new([0.0, 0.0, 0.0], 0.4).unwrap();
        assert!(flux_balance(&u, &p, &eta, &[0.01]).is_err());
        assert!(flux_balance(&u, &p, &eta, &[0.1, 0.2]).is_err());
    }
}
