use crate::error::{Error, Result};
use crate::field::quadrature::cell_weights;
use crate::field::{Point, Region, ScalarField, Weight};
use crate::matrixext::model::Mat3;

/// `I(r, z, u) = int_{B_r(z)} |grad u|^2 |x - z|^(2-n)`.
///
/// Gradients are taken per cell (exact for fields that are affine on each
/// cell edge); the cell containing `z` never evaluates the singular weight
/// at `z` itself.
pub fn weighted_energy(u: &ScalarField, z: &Point, r: f64) -> Result<f64> {
    let h = u.grid().h();
    if r < 4.0 * h * (1.0 - 1e-12) {
        return Err(Error::RadiusTooSmall { radius: r, h });
    }
    region_energy(u, &Region::ball(*z, r), None)
}

/// Weighted energy over a general region. With `form = Some(P)` the
/// integrand is `grad u . P grad u`, and the weight uses the region metric.
pub fn region_energy(u: &ScalarField, region: &Region, form: Option<&Mat3>) -> Result<f64> {
    let grid = u.grid();
    let dim = grid.dim();
    let weight = if dim == 2 { Weight::Unit } else { Weight::Singular };
    let cells = cell_weights(grid, region, weight)?;
    let total = cells
        .iter()
        .map(|&(lo, w)| {
            let g = u.cell_gradient(lo);
            let q = match form {
                None => (0..dim).map(|a| g[a] * g[a]).sum::<f64>(),
                Some(p) => {
                    let mut acc = 0.0;
                    for a in 0..dim {
                        for b in 0..dim {
                            acc += g[a] * p[a][b] * g[b];
                        }
                    }
                    acc
                }
            };
            q * w
        })
        .sum();
    Ok(total)
}

fn check_disjoint(uplus: &ScalarField, uminus: &ScalarField, z: &Point, r: f64) -> Result<()> {
    let grid = uplus.grid();
    let scale = uplus.max_abs() * uminus.max_abs();
    let tol = 1e-12 * scale;
    for i in 0..grid.len() {
        let p = grid.coord(i);
        if crate::field::grid::dist(&p, z) > r + grid.h() {
            continue;
        }
        let prod = uplus.get(i) * uminus.get(i);
        if prod.abs() > tol {
            return Err(Error::OverlappingSupports { product: prod, at: p });
        }
    }
    Ok(())
}

/// `Phi(r) = r^-4 I(r, u+) I(r, u-)` for nonnegative fields with
/// disjoint supports.
pub fn acf_phi(uplus: &ScalarField, uminus: &ScalarField, z: &Point, r: f64) -> Result<f64> {
    if uplus.grid() != uminus.grid() {
        return Err(Error::InvalidArgument("fields live on different grids".into()));
    }
    check_disjoint(uplus, uminus, z, r)?;
    let ip = weighted_energy(uplus, z, r)?;
    let im = weighted_energy(uminus, z, r)?;
    Ok(ip * im / r.powi(4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use std::f64::consts::PI;

    #[test]
    fn half_plane_energy_2d() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0].max(0.0));
        for r in [0.2, 0.5] {
            let i = weighted_energy(&u, &[0.0; 3], r).unwrap();
            let exact = PI * r * r / 2.0;
            assert!((i - exact).abs() / exact < 0.02, "{i} {exact}");
        }
    }

    #[test]
    fn half_ball_energy_3d() {
        let g = Grid::new(3, 1.0, 32).unwrap();
        let u = ScalarField::from_fn(g, |p| p[0].max(0.0));
        let r = 0.5;
        let i = weighted_energy(&u, &[0.0; 3], r).unwrap();
        let exact = PI * r * r;
        assert!((i - exact).abs() / exact < 0.03, "{i} {exact}");
    }

    #[test]
    fn constant_has_zero_energy() {
        let g = Grid::new(2, 1.0, 32).unwrap();
        let u = ScalarField::constant(g, 3.0);
        assert_eq!(weighted_energy(&u, &[0.0; 3], 0.5).unwrap(), 0.0);
        assert!(matches!(
            weighted_energy(&u, &[0.0; 3], 0.05),
            Err(Error::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn phi_of_planes() {
        let g = Grid::new(2, 1.0, 128).unwrap();
        let up = ScalarField::from_fn(g, |p| p[0].max(0.0));
        let um = ScalarField::from_fn(g, |p| (-p[0]).max(0.0));
        let phi = acf_phi(&up, &um, &[0.0; 3], 0.4).unwrap();
        assert!((phi - PI * PI / 4.0).abs() / (PI * PI / 4.0) < 0.04);
        let up2 = ScalarField::from_fn(g, |p| 0.5 * p[0].max(0.0));
        let phi = acf_phi(&up2, &um, &[0.0; 3], 0.4).unwrap();
        assert!((phi - PI * PI / 16.0).abs() / (PI * PI / 16.0) < 0.04);
        let zero = ScalarField::zeros(g);
        assert_eq!(acf_phi(&up, &zero, &[0.0; 3], 0.4).unwrap(), 0.0);
        assert!(matches!(
            acf_phi(&up, &up, &[0.0; 3], 0.4),
            Err(Error::OverlappingSupports { .. })
        ));
    }
}
