use crate::error::{Error, Result};
use crate::field::grid::dist;
use crate::field::{gradient_field, Point, ScalarField};
use crate::par;

/// `R = sup_D |grad u| d^(n/2+1) / ||u||_{L2(box)}` for `D = B_radius(center)`.
#[derive(Debug, Clone, Copy)]
pub struct LipschitzReport {
    pub center: Point,
    pub radius: f64,
    /// Distance from `D` to the box boundary.
    pub d: f64,
    pub sup_grad: f64,
    pub l2_norm: f64,
    pub ratio: f64,
}

/// Box `L2` norm with the trapezoidal node rule.
pub fn l2_box_norm(u: &ScalarField) -> f64 {
    let g = u.grid();
    let n = g.cells();
    let vol = g.h().powi(g.dim() as i32);
    let s = par::sum_range(g.len(), |i| {
        let ijk = g.unravel(i);
        let w: f64 = (0..g.dim())
            .map(|a| if ijk[a] == 0 || ijk[a] == n { 0.5 } else { 1.0 })
            .product();
        w * u.get(i).powi(2)
    });
    (s * vol).sqrt()
}

/// Requires `d >= 8h`. `R = 0` when `u` vanishes identically.
pub fn lipschitz_audit(u: &ScalarField, center: &Point, radius: f64) -> Result<LipschitzReport> {
    let g = u.grid();
    let reach = (0..g.dim()).map(|a| center[a].abs()).fold(0.0, f64::max) + radius;
    let d = g.radius() - reach;
    if !(radius > 0.0) || d < 8.0 * g.h() * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "subdomain B_{radius}({center:?}) must stay 8h inside the box (distance {d})"
        )));
    }
    let du = gradient_field(u);
    let sup_grad = par::max_range(g.len(), |i| {
        if dist(&g.coord(i), center) <= radius {
            du.magnitude(i)
        } else {
            0.0
        }
    });
    let l2_norm = l2_box_norm(u);
    let ratio = if l2_norm == 0.0 {
        0.0
    } else {
        sup_grad * d.powf(g.dim() as f64 / 2.0 + 1.0) / l2_norm
    };
    Ok(LipschitzReport {
        center: *center,
        radius,
        d,
        sup_grad,
        l2_norm,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    #[test]
    fn two_plane_closed_form() {
        // u = x/2 (x > 0), x (x < 0) on [-1,1]^2: ||u||^2 = 2 (1/12 + 1/3) = 5/6
        let g = Grid::new(2, 1.0, 64).unwrap();
        let u = ScalarField::from_fn(g, |p| if p[0] > 0.0 { p[0] / 2.0 } else { p[0] });
        let r = lipschitz_audit(&u, &[0.0; 3], 0.5).unwrap();
        let exact = 1.0 * 0.5f64.powi(2) / (5.0f64 / 6.0).sqrt();
        assert!((r.ratio - exact).abs() / exact < 1e-3, "{}", r.ratio);
        let z = ScalarField::zeros(g);
        assert_eq!(lipschitz_audit(&z, &[0.0; 3], 0.5).unwrap().ratio, 0.0);
        assert!(lipschitz_audit(&u, &[0.0; 3], 0.95).is_err());
    }
}
